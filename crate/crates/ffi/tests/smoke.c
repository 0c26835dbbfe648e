#include <math.h>
#include <stdio.h>
#include "shrinkerlab.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    SlabStatus st_ = (call);                                               \
    if (st_ != SLAB_STATUS_OK) {                                           \
      fprintf(stderr, "%s failed (%d): %s\n", #call, st_, slab_last_error()); \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  size_t dim = 0;
  CHECK(slab_kernel_dimension(1, 2, &dim));
  if (dim != 3) return 2;
  if (slab_kernel_dimension(3, 2, &dim) != SLAB_STATUS_INVALID_ARGUMENT) return 3;

  SlabField *field = NULL;
  CHECK(slab_field_new(16, 16, 12.0, &field));
  CHECK(slab_field_add_mode(field, 2, 0, 1e-3));
  SlabFlow *flow = NULL;
  CHECK(slab_flow_new(field, SLAB_SCHEME_IMEX_SPECTRAL, 0.01, 1, &flow));
  SlabDiagnostics before, after;
  CHECK(slab_flow_diagnostics(flow, &before));
  CHECK(slab_flow_step(flow, 100));
  CHECK(slab_flow_diagnostics(flow, &after));
  slab_flow_free(flow);
  slab_field_free(field);
  if (fabs(after.s - 1.0) > 1e-9 || !(after.phi_l2 < before.phi_l2)) return 4;
  printf("shrinkerlab %s: F(C) = %.12f, phi %.3e -> %.3e\n", slab_version(), slab_cylinder_f(), before.phi_l2, after.phi_l2);
  return 0;
}

#include <math.h>
#include <stdio.h>

#include "renormal.h"

#define CHECK(call)                                                     \
    do {                                                                \
        RnStatus s_ = (call);                                           \
        if (s_ != RN_OK) {                                              \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, rn_last_error()); \
            return 1;                                                   \
        }                                                               \
    } while (0)

int main(void) {
    RnSigma *sigma = NULL;
    RnField *u = NULL;
    RnKernel *kernel = NULL;
    RnField *dc = NULL;
    double e2 = 0.0, dc_norm = 0.0;

    CHECK(rn_sigma_from_preset(1, 256, 1, "trig", 0, &sigma));
    CHECK(rn_field_from_preset(1, 256, "box-indicator 0.25 0.75", 0, &u));
    CHECK(rn_kernel_new("bump", 0.0625, 1, 256, &kernel));
    CHECK(rn_e2_norm(sigma, u, kernel, 2.0, &e2));
    CHECK(rn_double_commutator(sigma, u, kernel, &dc));
    CHECK(rn_lq_norm(dc, 1.0, &dc_norm));
    if (!(e2 > 0.0) || !isfinite(dc_norm)) {
        return 1;
    }
    if (rn_kernel_new("bump", 0.001, 1, 256, &kernel) != RN_NUMERICAL || rn_last_error() == NULL) {
        return 1;
    }
    printf("version %s e2 %.17g dc %.17g\n", rn_version(), e2, dc_norm);

    rn_field_free(dc);
    rn_kernel_free(kernel);
    rn_field_free(u);
    rn_sigma_free(sigma);
    return 0;
}

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "kerr_floquet.h"

static int check(KfStatus st, KfStatus want, const char *what) {
    if (st != want) {
        char msg[256];
        kf_last_error(msg, sizeof msg);
        fprintf(stderr, "%s: status %d (%s)\n", what, (int)st, msg);
        return 1;
    }
    return 0;
}

int main(void) {
    KfParams *p = NULL;
    KfRwaCoefficients a, b;
    KfSteadyState roots[3];
    size_t count = 0;
    double delta = 0.0;
    int bad = 0;

    bad |= check(kf_params_from_a_basis(1.0, 1.0, 1.0, 5e-2, 5e-4, 5e-3, &p), KF_STATUS_OK, "params");
    bad |= check(kf_params_set_gamma(p, 2.5e-3), KF_STATUS_OK, "gamma");
    bad |= check(kf_rwa_coefficients(p, KF_BASIS_SYSTEM_PHOTONS, &a), KF_STATUS_OK, "a");
    bad |= check(kf_rwa_coefficients(p, KF_BASIS_PUMP_PHOTONS, &b), KF_STATUS_OK, "b");
    bad |= check(kf_kb_steady_states(p, roots, 3, &count), KF_STATUS_OK, "roots");
    bad |= check(kf_mpr_predicted(p, KF_BASIS_SYSTEM_PHOTONS, 2, KF_CONVENTION_STANDARD, &delta), KF_STATUS_OK, "mpr");
    bad |= check(kf_rwa_coefficients(NULL, 0, &a), KF_STATUS_NULL_POINTER, "null");
    kf_params_free(p);

    if (bad || count != 3 || roots[1].stable != 0 || fabs(a.delta_c - 5e-3) > 1e-15 || fabs(delta - 2.5e-2) > 1e-14) {
        fprintf(stderr, "unexpected values\n");
        return 1;
    }
    printf("ok %s %zu\n", kf_version(), count);
    return 0;
}

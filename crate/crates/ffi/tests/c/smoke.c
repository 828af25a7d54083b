#include <math.h>
#include <stdio.h>
#include "afmi.h"

int main(void) {
    AfmiModel *m = NULL;
    if (afmi_model_new(0.1, 0.319, 0.3, 0.322, 2.2, 15.0, &m) != AFMI_STATUS_OK) return 1;
    AfmiEquilibrium eq[8];
    size_t n = 0;
    if (afmi_equilibria(m, eq, 8, &n) != AFMI_STATUS_OK || n != 5) return 2;
    int interior = 0;
    for (size_t i = 0; i < n; i++)
        if (eq[i].kind == AFMI_EQUILIBRIUM_KIND_INTERIOR_LOW || eq[i].kind == AFMI_EQUILIBRIUM_KIND_INTERIOR_HIGH) interior++;
    if (interior != 2) return 3;
    AfmiEvent ev;
    if (afmi_locate(m, AFMI_BIFURCATION_SADDLE_NODE, 2.3, 2.6, &ev) != AFMI_STATUS_OK) return 4;
    if (fabs(ev.xi_star - 2.4827835) > 1e-6) return 5;
    AfmiModel *bad = NULL;
    if (afmi_model_new(0.1, 0.319, 0.3, 0.322, 2.2, -1.0, &bad) != AFMI_STATUS_INVALID_PARAMETER) return 6;
    if (afmi_last_error() == NULL) return 7;
    afmi_model_free(m);
    printf("ok %.7f\n", ev.xi_star);
    return 0;
}

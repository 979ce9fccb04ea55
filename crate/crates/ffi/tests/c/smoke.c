#include <math.h>
#include <stdio.h>
#include "qsl.h"

#define CHECK(cond)                                             \
    do {                                                        \
        if (!(cond)) {                                          \
            fprintf(stderr, "failed: %s (line %d)\n", #cond, __LINE__); \
            return 1;                                           \
        }                                                       \
    } while (0)

int main(void) {
    double v = -1.0;
    CHECK(qsl_alpha(0.0, &v) == QSL_STATUS_OK && fabs(v - 1.0) < 1e-12);
    CHECK(qsl_alpha(2.0, &v) == QSL_STATUS_DOMAIN);
    char msg[128];
    CHECK(qsl_last_error(msg, sizeof msg) > 0);

    double ym, yp;
    CHECK(qsl_y_bounds(&ym, &yp) == QSL_STATUS_OK);
    CHECK(fabs(ym - 2.3311) < 1e-4 && fabs(yp - 4.4934) < 1e-4);

    double e[2] = {0.0, 1.0}, re[2] = {1.0, 1.0}, im[2] = {0.0, 0.0};
    QslState *s = NULL;
    CHECK(qsl_state_new(e, re, im, 2, true, &s) == QSL_STATUS_OK);
    bool found = false;
    double t, f;
    CHECK(qsl_state_first_passage(s, 0.0, 4.0 * M_PI, 4096, &found, &t, &f) == QSL_STATUS_OK);
    CHECK(found && fabs(t - M_PI) < 1e-9);
    CHECK(qsl_state_ml_bound(s, 0.0, &v) == QSL_STATUS_OK && fabs(v - M_PI) < 1e-12);
    qsl_state_free(s);
    printf("ok\n");
    return 0;
}

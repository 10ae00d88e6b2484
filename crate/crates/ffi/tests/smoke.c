#include <math.h>
#include <stdio.h>

#include "flatweb.h"

int main(void) {
    FwWeb *web = NULL;
    if (fw_web_new_depressed("1", "y", -1.0, 1.0, -1.0, 1.0, &web) != FW_STATUS_OK) {
        fprintf(stderr, "%s\n", fw_last_error_message());
        return 1;
    }
    double k = 0.0, delta = 0.0;
    if (fw_curvature(web, 0.0, 1.0, &k, &delta) != FW_STATUS_OK || fabs(k + 216.0 / 961.0) > 1e-12) {
        fprintf(stderr, "curvature %g\n", k);
        return 1;
    }
    if (fw_curvature(web, 0.0, 1.0, NULL, &delta) != FW_STATUS_NULL_POINTER) {
        return 1;
    }
    char *json = NULL;
    if (fw_web_to_json(web, &json) != FW_STATUS_OK) {
        return 1;
    }
    fw_string_free(json);
    fw_web_free(web);
    puts("ok");
    return 0;
}

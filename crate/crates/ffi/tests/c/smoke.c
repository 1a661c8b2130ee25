#include <stdio.h>
#include <string.h>
#include <math.h>

#include "isocircle.h"

/* Filled disk at (64, 72), r = 30, on a 128x128 image. */
int main(void) {
    enum { W = 128, H = 128 };
    static uint8_t px[W * H];
    for (int y = 0; y < H; y++)
        for (int x = 0; x < W; x++) {
            double dx = x - 64.0, dy = y - 72.0;
            px[y * W + x] = dx * dx + dy * dy <= 900.0 ? 204 : 51;
        }

    IcImage *img = NULL;
    if (ic_image_from_gray8(W, H, px, 0, &img) != IC_STATUS_OK) return 1;

    IcConfig cfg;
    ic_config_default(&cfg);
    cfg.seed = 3;

    IcDetections *found = NULL;
    if (ic_detect(img, &cfg, &found) != IC_STATUS_OK) return 2;
    if (ic_detections_len(found) != 1) return 3;

    IcCircle c;
    if (ic_detections_get(found, 0, &c) != IC_STATUS_OK) return 4;
    if (fabs(c.a - 64.0) > 1.0 || fabs(c.b - 72.0) > 1.0 || fabs(c.r - 30.0) > 1.0) return 5;

    if (ic_detections_get(found, 1, &c) != IC_STATUS_OUT_OF_RANGE) return 6;
    const char *msg = ic_last_error_message();
    if (msg == NULL || strstr(msg, "out of range") == NULL) return 7;

    IcStats st;
    ic_detections_stats(found, &st);
    if (st.iterations > st.budget || st.candidates_validated != 1) return 8;

    printf("%.3f %.3f %.3f %s\n", c.a, c.b, c.r, ic_version());
    ic_detections_free(found);
    ic_image_free(img);
    return 0;
}

# -*- coding: UTF-8 -*-
#!/usr/bin/env python

THREADS = 3
SEED = 20110519

BIN_BYTES = 1024
CAP_BYTES = 10 * 2 ** 30
# k_min scan range in KB bins, 1 KB up to 100 MB
KMIN_LO_KB = 1
KMIN_HI_KB = 102400
GRID_POINTS = 256
MIN_TAIL_COUNT = 100

NORMALIZER_RTOL = 1e-10
ALPHA_BOUNDS = (1.0, 6.0)
ALPHA_XATOL = 1e-7
MU_BOUNDS = (-5.0, 25.0)
SIGMA_BOUNDS = (0.05, 8.0)
LOGNORMAL_XATOL = 1e-7
LOGNORMAL_RESTARTS = 3

SOLVER_MAX_ITER = 200
SOLVER_TOL = 1e-8
SOLVER_MAX_SUPPORT = 10 ** 7
HESSIAN_COND_LIMIT = 1e12
PROJECTION_MAX_ITER = 500
PROJECTION_TOL = 1e-9

MANIFEST_LINE_LIMIT = 64 * 1024
MANIFEST_SNIFF_LINES = 1000
MANIFEST_SNIFF_MIN_LINES = 10
MANIFEST_MALFORMED_RATIO = 0.5
BATCH_SIZE = 65536

EXACT_MEDIAN_LIMIT = 10 ** 7
SKETCH_RELATIVE_ACCURACY = 1e-3

LOG_BASE = 2.0

CATEGORIES = ["application", "audio", "image", "text", "video"]
CATEGORY_MIME = {
    "application": "application/pdf",
    "audio": "audio/mpeg",
    "image": "image/jpeg",
    "text": "text/html",
    "video": "video/mp4",
    "other": "unknown/unknown",
}
FAMILIES = ["powerlaw", "lognormal", "exponential"]

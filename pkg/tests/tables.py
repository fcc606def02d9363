"""Loadings and variance rows as printed in the comparison tables."""

import numpy as np

# pitprops, six components; rows follow fgspca.datasets.PITPROPS_NAMES
SPCA_PITPROPS = np.zeros((13, 6))
SPCA_PITPROPS[[0, 1, 4, 6, 7, 8, 9], 0] = [-0.477, -0.476, 0.177, -0.250, -0.344, -0.416, -0.400]
SPCA_PITPROPS[[2, 3, 7, 11], 1] = [0.785, 0.619, -0.021, 0.013]
SPCA_PITPROPS[[4, 5, 6, 12], 2] = [0.641, 0.589, 0.492, -0.016]
SPCA_PITPROPS[10, 3] = -1.0
SPCA_PITPROPS[11, 4] = -1.0
SPCA_PITPROPS[12, 5] = 1.0

FGSPCA_PITPROPS = np.zeros((13, 6))
FGSPCA_PITPROPS[:, 0] = [-0.373, -0.373, 0, 0, 0, -0.373, -0.373, -0.373, -0.373, -0.373, 0, 0.110, 0.110]
FGSPCA_PITPROPS[:, 1] = [0.293, 0.293, 0, 0, -0.621, -0.368, -0.368, 0, 0.293, 0, 0, 0, 0.293]
FGSPCA_PITPROPS[[2, 3], 2] = [0.704, 0.710]
FGSPCA_PITPROPS[[9, 10], 3] = [0.418, -0.908]
FGSPCA_PITPROPS[[5, 7, 11], 4] = [-0.387, 0.479, -0.788]
FGSPCA_PITPROPS[12, 5] = 1.0

SPCA_PITPROPS_ROWS = {
    "groups": (6, 4, 4, 1, 1, 1),
    "nonzeros": (7, 4, 4, 1, 1, 1),
    "variance": (28.0, 14.4, 15.0, 7.7, 7.7, 7.7),
    "adjusted": (28.0, 14.0, 13.3, 7.4, 6.8, 6.2),
    "cumulative": (28.0, 42.0, 55.3, 62.7, 69.5, 75.8),
    "complexity": 18,
}
FGSPCA_PITPROPS_ROWS = {
    "groups": (2, 3, 1, 2, 3, 1),
    "nonzeros": (9, 7, 2, 2, 3, 1),
    "variance": (30.9, 13.7, 14.5, 9.5, 9.6, 7.7),
    "adjusted": (31.0, 13.7, 13.9, 8.1, 7.7, 4.5),
    "cumulative": (31.0, 44.7, 58.6, 66.7, 74.4, 78.9),
    "complexity": 12,
}

# hidden-factors example, two components
SPCA_HIDDEN3 = np.zeros((10, 2))
SPCA_HIDDEN3[4:8, 0] = -0.5
SPCA_HIDDEN3[0:4, 1] = 0.5
FGSPCA_HIDDEN3 = np.zeros((10, 2))
FGSPCA_HIDDEN3[4:8, 0] = -0.415
FGSPCA_HIDDEN3[8:10, 0] = -0.395
FGSPCA_HIDDEN3[0:4, 1] = 0.5
HIDDEN3_CUMULATIVE = {
    "pca": (60.23, 100.0),
    "spca": (41.02, 80.67),
    "threshold": (38.88, 77.61),
    "fgspca": (59.11, 98.39),
}

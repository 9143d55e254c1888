"""
Bundled instances
Three-vehicle case study (red, white, red) and an engineered tipping-point instance
"""

import numpy as np

from paintseq.models import make_instance

CASE_STUDY_COLORS = ['red', 'white', 'red']
CASE_STUDY_STYLES = ['A', 'B', 'B']

# Row = current vehicle i, column = preceding vehicle j
CASE_STUDY_REPAIR = np.array([
    [0.00, 0.06, 0.19],
    [0.02, 0.00, 0.08],
    [0.20, 0.03, 0.00],
])

# Best one-changeover order (3, 1, 2) has p-sum 0.30, best two-changeover
# order (1, 2, 3) has 0.05: 20 + 0.30 r = 40 + 0.05 r at r = 80.
TIPPING_POINT_REPAIR = np.array([
    [0.00, 0.10, 0.28],
    [0.02, 0.00, 0.10],
    [0.25, 0.03, 0.00],
])
TIPPING_POINT_RATE = 80.0


def case_study(repair_rate=100.0):
    return make_instance(CASE_STUDY_COLORS, CASE_STUDY_STYLES,
                         changeover_rate=20.0, repair_rate=repair_rate,
                         repair_matrix=CASE_STUDY_REPAIR)


def tipping_point(repair_rate=100.0):
    return make_instance(CASE_STUDY_COLORS, CASE_STUDY_STYLES,
                         changeover_rate=20.0, repair_rate=repair_rate,
                         repair_matrix=TIPPING_POINT_REPAIR)


FIXTURES = {
    'case-study': case_study,
    'tipping-point': tipping_point,
}

"""Published reference numbers used by `reproduce-paper` and the acceptance tests.

Baseline parameters are those of ModelParams() / RegulatoryParams().
"""

BASELINE_Y_STAR = 1.674
BASELINE_Y_POST = 1.228
BASELINE_V_Y0 = 1.0666  # v(1.2)
BASELINE_DV_REL = 0.5229  # (v - v_no_issuance)/v at y = 1.2
Y_HAT_BASELINE = 1.168

# (value of the varied parameter, y*, relative issuance value at y = 1.2)
SENSITIVITY = {
    "a1": [
        (0.045, 1.674, 0.5229), (0.05, 1.699, 0.5235), (0.06, 1.753, 0.5245),
        (0.07, 1.814, 0.5256), (0.08, 1.882, 0.5276), (0.09, 1.957, 0.5304),
        (0.1, 2.041, 0.5357), (0.11, 2.134, 0.5438), (0.12, 2.236, 0.5545),
    ],
    "a2": [
        (0.05, 1.674, 0.5229), (0.06, 1.667, 0.5198), (0.08, 1.653, 0.5136),
        (0.09, 1.646, 0.5105), (0.1, 1.639, 0.5073), (0.12, 1.625, 0.5008),
        (0.15, 1.604, 0.4909), (0.18, 1.583, 0.4806), (0.2, 1.569, 0.4735),
    ],
    "a3": [
        (0.15, 1.895, 0.8074), (0.2, 1.885, 0.7144), (0.25, 1.710, 0.6089),
        (0.3, 1.674, 0.5229), (0.35, 1.414, 0.4882), (0.4, 1.316, 0.4659),
        (0.45, 1.259, 0.4443), (0.5, 1.221, 0.4243), (0.55, 1.193, 0.4060),
    ],
}

FEASIBLE_UNCAPPED = 486
FEASIBLE_CAPPED = 729

# (a1, a2, a3, y*, v(1.2), P(tau >= 5)), ordered by decreasing survival
FRONTIER_UNCAPPED = [
    (0.12, 0.18, 0.3, 2.069, 0.8711, 0.927),
    (0.12, 0.05, 0.3, 2.236, 0.9948, 0.923),
    (0.11, 0.06, 0.3, 2.122, 0.9983, 0.895),
    (0.11, 0.05, 0.3, 2.134, 1.0079, 0.868),
    (0.1, 0.05, 0.3, 2.041, 1.0198, 0.848),
    (0.09, 0.05, 0.3, 1.957, 1.0304, 0.754),
    (0.08, 0.05, 0.3, 1.882, 1.0400, 0.680),
    (0.07, 0.05, 0.3, 1.814, 1.0487, 0.597),
    (0.06, 0.05, 0.3, 1.753, 1.0565, 0.486),
    (0.05, 0.05, 0.3, 1.699, 1.0634, 0.433),
    (0.045, 0.05, 0.3, 1.674, 1.0666, 0.336),
]
FRONTIER_CAPPED = [
    (0.12, 0.05, 0.25, 1.175, 0.2664, 0.860),
    (0.11, 0.08, 0.25, 1.164, 0.2766, 0.796),
    (0.1, 0.08, 0.35, 1.152, 0.2867, 0.724),
    (0.09, 0.08, 0.15, 1.141, 0.2965, 0.619),
    (0.08, 0.2, 0.35, 1.131, 0.3059, 0.507),
    (0.07, 0.06, 0.4, 1.121, 0.3151, 0.388),
    (0.06, 0.2, 0.3, 1.111, 0.3237, 0.264),
    (0.05, 0.09, 0.4, 1.102, 0.3318, 0.181),
    (0.045, 0.08, 0.15, 1.097, 0.3357, 0.134),
]

PICKS_UNCAPPED = {0.8: (0.1, 0.05, 0.3), 0.9: (0.12, 0.05, 0.3)}
PICKS_CAPPED = {0.8: (0.12, 0.05, 0.25), 0.9: None}

# 50-year bank ladder: (y0, E[total issuance], E[total dividend], Sharpe)
BANKS_UNCAPPED_TRIPLE = (0.1, 0.05, 0.3)
BANKS_UNCAPPED = [
    (1.05, 1.4077, 5.0537, 1.8698), (1.1, 1.2853, 5.0502, 1.8965),
    (1.15, 1.2311, 5.0812, 1.8757), (1.2, 1.1917, 5.1485, 1.8991),
    (1.25, 1.1598, 5.2062, 1.9138), (1.3, 1.1376, 5.3152, 1.9477),
]
BANKS_CAPPED_TRIPLE = (0.12, 0.05, 0.25)
BANKS_CAPPED = [
    (1.05, 0.6765, 1.0465, 2.4530), (1.1, 0.6425, 1.0855, 2.5124),
    (1.15, 0.6307, 1.1365, 2.6160), (1.2, 0.6261, 1.1822, 2.7263),
    (1.25, 0.6257, 1.2318, 2.8472), (1.3, 0.6257, 1.2818, 2.9684),
]
BANK_Y0 = (1.05, 1.1, 1.15, 1.2, 1.25, 1.3)

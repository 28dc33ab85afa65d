"""Central tolerance table, echoed into every verification report."""

TOLERANCES = {
    "fiber_residual": 1e-9,
    "rank_threshold": 1e-6,
    "winding_rounding": 0.1,
    "loop_samples": 1024,
    "puncture_hard": 1e-12,
    "puncture_warn": 1e-6,
    "cylinder": 1e-9,
    "alpha_quadratic_residual": 1e-10,
    "branch_agreement": 1e-9,
    "winding_clearance": 1e-6,
}

FIBER_RESIDUAL = TOLERANCES["fiber_residual"]
RANK_THRESHOLD = TOLERANCES["rank_threshold"]
WINDING_ROUNDING = TOLERANCES["winding_rounding"]
LOOP_SAMPLES = TOLERANCES["loop_samples"]
PUNCTURE_HARD = TOLERANCES["puncture_hard"]
PUNCTURE_WARN = TOLERANCES["puncture_warn"]
CYLINDER_TOL = TOLERANCES["cylinder"]
WINDING_CLEARANCE = TOLERANCES["winding_clearance"]

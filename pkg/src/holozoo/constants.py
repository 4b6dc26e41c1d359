"""Numerical tolerances and sampling constants shared across the package.

Every tolerance that can influence a verdict is defined here once and
echoed into JSON reports, so a report is self-describing.
"""

TRANSPORT_TOL = 1e-8          # step-halving convergence target for transports
TRANSPORT_STEP_FLOOR = 1e-6   # smallest curve-parameter step before flagging
FIXED_SPACE_RTOL = 1e-6       # singular-value cut for the common fixed subspace
TIMELIKE_EIG_TOL = 1e-8       # negative-eigenvalue threshold on the restricted metric
CAUSAL_TOL = 1e-10            # relative tolerance for causal classification
PARALLEL_FIELD_TOL = 1e-5     # path-independence residual certifying a parallel field
HAAR_RESIDUAL_TOL = 1e-6      # invariance residual target for group averaging
FLIP_CONNECTION_TOL = 1e-6    # connection agreement target for flip metrics
FLIP_FD_STEP = 1e-4           # finite-difference step for flip Christoffels
METRIC_DEGENERACY_COND = 1e12 # condition number above which the metric is rejected
IDENTIFICATION_TOL = 1e-8     # pullback deviation allowed for an identification
SLICE_GEODESIC_TOL = 1e-8     # second-fundamental-form bound for slices
BLOWUP_SPEED = 1e9            # auxiliary Euclidean speed declaring geodesic blowup
BLOWUP_STEP_FLOOR = 1e-12     # adaptive step collapse declaring blowup
ALGEBRA_RANK_RTOL = 1e-6      # singular-value cut for the generator-log span
ALGEBRA_LOG_RADIUS = 0.5      # max-norm distance from identity for principal logs

LOOP_SCALES = (0.2, 0.05, 0.01)  # rectangle sizes as fractions of the working box


def tolerance_table() -> dict:
    """Tolerances in report form."""
    return {
        "transport_tol": TRANSPORT_TOL,
        "transport_step_floor": TRANSPORT_STEP_FLOOR,
        "fixed_space_rtol": FIXED_SPACE_RTOL,
        "timelike_eig_tol": TIMELIKE_EIG_TOL,
        "causal_tol": CAUSAL_TOL,
        "parallel_field_tol": PARALLEL_FIELD_TOL,
        "haar_residual_tol": HAAR_RESIDUAL_TOL,
        "flip_connection_tol": FLIP_CONNECTION_TOL,
        "flip_fd_step": FLIP_FD_STEP,
        "metric_degeneracy_cond": METRIC_DEGENERACY_COND,
        "identification_tol": IDENTIFICATION_TOL,
        "slice_geodesic_tol": SLICE_GEODESIC_TOL,
        "blowup_speed": BLOWUP_SPEED,
        "blowup_step_floor": BLOWUP_STEP_FLOOR,
        "algebra_rank_rtol": ALGEBRA_RANK_RTOL,
        "algebra_log_radius": ALGEBRA_LOG_RADIUS,
        "loop_scales": list(LOOP_SCALES),
    }

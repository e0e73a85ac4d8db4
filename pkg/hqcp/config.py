import math

# -----------------------------------------------------------------------------
# Solver config.

# Penalty parameter of the augmented Lagrangian. Convergence theory needs
# TAU >= TAU_THEORY_MIN, but the reference experiments run with 0.7 or 1.
TAU = 1.0
TAU_THEORY_MIN = math.sqrt(10)
# Proximal weight for the factor updates, any positive value is allowed.
ALPHA = 1e-8
# Scale of the Cauchy loss. Small values make the model more robust, large
# values make it behave like least squares.
DELTA = 0.05
# Stop when the change of ||[[sigma; U]] - A|| is below TOLERANCE or after
# MAX_ITERATIONS iterations.
MAX_ITERATIONS = 2000
TOLERANCE = 1e-6
SEED = 0
# Allowed deviation from unit columns or orthonormality.
CONSTRAINT_TOLERANCE = 1e-10

# -----------------------------------------------------------------------------
# Noise models config.

CAUCHY_SCALE = 0.05
CAUCHY_BETA = 0.5
OUTLIER_DENSITY = 0.1
OUTLIER_LOW = 0.0
OUTLIER_HIGH = 10.0
GAUSSIAN_BETA = 0.1

# -----------------------------------------------------------------------------
# Benchmark config.

# Number of random instances for each case. Use 50 to match the reference
# tables, 20 is enough for a quick check.
BENCH_INSTANCES = 20
BENCH_RANK = 5

# -----------------------------------------------------------------------------
# Video config.

VIDEO_RANK = 30
PGM_MAXVAL = 255
# Foreground pixels are those with |F| above this fraction of the contrast.
FOREGROUND_THRESHOLD_FRACTION = 0.5

# -----------------------------------------------------------------------------
#  Behavior config

# Record Lagrangian values and residuals for every iteration.
DIAGNOSTICS = False

# Warn if TAU is below the value required by the convergence theory.
TAU_THEORY_WARN = True

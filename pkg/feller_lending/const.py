"""Provide constants shared by the solvers, the simulators and the cli."""
# Coefficient modes
MODE_FINITE = "finite-player"
MODE_MEAN_FIELD = "mean-field"
MODES = (MODE_FINITE, MODE_MEAN_FIELD)

# Horizon kinds
HORIZON_FINITE = "finite"
HORIZON_INFINITE = "infinite"

# Simulation schemes
SCHEME_EULER = "full-truncation-euler"
SCHEME_EXACT = "exact-besq"
SCHEMES = (SCHEME_EULER, SCHEME_EXACT)

# Recording modes
RECORD_FULL = "full-paths"
RECORD_TERMINAL = "terminal-plus-events"
RECORDS = (RECORD_FULL, RECORD_TERMINAL)

# Ensemble kinds
KIND_UNCONTROLLED = "uncontrolled"
KIND_EQUILIBRIUM = "equilibrium"
KIND_TOTAL_RESERVE = "total-reserve"
KIND_MFG = "mfg-representative"
KINDS = (KIND_UNCONTROLLED, KIND_EQUILIBRIUM, KIND_TOTAL_RESERVE, KIND_MFG)

# Initial conditions
INITIAL_POINT = "point"
INITIAL_FIXED = "fixed"
INITIAL_GAMMA = "gamma"

# Regimes of the total reserve
REGIME_NEVER = "never-hits-zero"
REGIME_RECURRENT = "hits-zero-recurrent-limsup-infinite"
REGIME_REFLECTING = "hits-zero-reflecting"
REGIME_ABSORBED = "absorbed-in-finite-time"
REGIMES = (REGIME_NEVER, REGIME_RECURRENT, REGIME_REFLECTING, REGIME_ABSORBED)

# Zero-hitting formula variants
VARIANT_STANDARD = "standard-besq"
VARIANT_STATED = "paper-stated"
VARIANTS = (VARIANT_STANDARD, VARIANT_STATED)

# Coefficient table columns
COL_T = "t"
COL_ETA = "eta"
COL_L = "L"
COL_PHI = "phi"
COL_MU = "mu"
COL_PSI = "psi"
COL_M = "m"
COEFF_COLUMNS = (COL_T, COL_ETA, COL_L, COL_PHI, COL_MU, COL_PSI)
STATIONARY_COLUMNS = (COL_ETA, COL_L, COL_PHI, COL_MU, COL_PSI)

# Path table columns
COL_PATH = "path"
COL_BANK = "bank"
COL_VALUE = "value"
PATH_COLUMNS = (COL_PATH, COL_T, COL_BANK, COL_VALUE)

# Binary ensemble cache
BINARY_MAGIC = b"FELLERSIM1"
BINARY_VERSION = 1

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CROSS_CHECK = 3

# Diffusion coefficient of every reserve process, dX = ... dt + 2 sqrt(X) dW.
DIFFUSION_SCALE = 2.0

# Tolerances
BOUNDARY_TOL = 1e-12
ETA_TOL = 1e-8
TERMINAL_TOL = 1e-12
MFG_L_TOL = 1e-8
STATIONARY_RESIDUAL_TOL = 1e-12
HJB_TOL_INTERIOR = 1e-6
HJB_TOL_BOUNDARY = 1e-4
VARIANT_DISAGREEMENT_TOL = 1e-6
TRUNCATION_WARN_RATE = 0.01

# Grid defaults
STEPS_PER_UNIT = 10_000
BLOCK_SIZE = 256

"""Pinned engine constants.

Every tunable that affects geometry or wire bytes lives here so tests can
assert against a single source of truth. Values are plain module constants;
nothing reads the environment except the service address/data dir (see
``gesto.service``).
"""

import math

# Virtual nib: device-local offset of the paint emitter, meters. Default puts
# the nib at the top edge of a hand-held phone.
DEFAULT_NIB_OFFSET = (0.0, 0.08, 0.0)

# Maximum sane magnitude for a nib offset on a handheld device, meters.
MAX_NIB_OFFSET = 0.5

# Centerline resampling spacing, meters. 5 mm keeps 60 Hz hand motion smooth
# without visible faceting.
DEFAULT_MIN_SPACING = 0.005

# Moving-average smoothing window (odd point count).
DEFAULT_SMOOTH_WINDOW = 3

# Brush defaults.
DEFAULT_BASE_WIDTH = 0.05
DEFAULT_COLOR = (0.9, 0.15, 0.2, 1.0)
DEFAULT_SPRAY_HALF_ANGLE = math.radians(15.0)
DEFAULT_SPRAY_RANGE = 0.5
DEFAULT_DRIP_PROBABILITY = 0.3
DEFAULT_DRIP_MAX_LENGTH = 0.2

# Cross-section sides for tube tessellation in free-space mode.
DEFAULT_TUBE_SIDES = 8

# Spray footprint: grazing-incidence clamp on |cos| so the ellipse stays
# bounded when the ray is nearly parallel to the wall.
SPRAY_COS_CLAMP = 0.1

# Drip model: candidate seeds are taken every this-many resampled centerline
# points; accepted drips get a length uniform in [MIN, MAX] fractions of the
# brush drip_max_length, and are rendered as a two-point ribbon whose width
# tapers between the two fractions of base_width below.
DRIP_SEED_SPACING = 4
DRIP_LENGTH_FRACTION_MIN = 0.3
DRIP_LENGTH_FRACTION_MAX = 1.0
DRIP_WIDTH_START_FRACTION = 0.4
DRIP_WIDTH_END_FRACTION = 0.15

# World gravity direction used for drips; the world is y-up.
GRAVITY = (0.0, -1.0, 0.0)
WORLD_UP = (0.0, 1.0, 0.0)

# Canvas constraint: outward lift applied to plane-constrained points so
# strokes never z-fight the wall, meters.
CANVAS_LIFT = 0.001

# Padding added around scanned sample bounds, meters.
CANVAS_BOUNDS_PADDING = 0.05

# Default RMS ceiling for accepting a wall scan, meters.
DEFAULT_SCAN_MAX_RMS = 0.02

# Artwork field caps, bytes of UTF-8.
MAX_AUTHOR_BYTES = 64
MAX_TITLE_BYTES = 256

# Service payload cap.
MAX_PAYLOAD_BYTES = 16 * 1024 * 1024

# Service defaults (overridable via GESTO_ADDR / GESTO_DATA_DIR).
DEFAULT_ADDR = "127.0.0.1:8787"
DEFAULT_DATA_DIR = "./gesto-data"

"""Flume geometry, particle seeding, wave gauges and the scenario catalogue.

The default scenario encodes the hybrid tsunami open flume: a 14.05 m flat
bed, a 1:10 beach slope over a 7.95 m run, then an 8 m terrace at 0.795 m
on which a 0.4 m x 0.5 m box structure stands 0.79 m beyond the end of the
slope.  Still water is 0.75 m deep and the piston wavemaker occupies x = 0.

Degenerate slope/terrace lengths of zero are accepted so the same machinery
can seed plain flat-bed tanks (used for celerity and convergence studies);
every physical dimension that must be strictly positive is validated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InvalidGeometry, ResolutionTooCoarse
from .kernels import KernelConfig
from .sph import (FLUID, WALL_FIXED, WALL_PISTON, CellGrid, FluidConstants,
                  PistonMotion, SimState)
from .wavemaker import RayleighPiston

#: (wave height [m], wavelength [m], celerity [m/s]) rows of the paddle catalogue
WAVE_CATALOGUE = (
    (0.4, 9.22634, 3.35879),
    (0.5, 8.60361, 3.50179),
    (0.6, 8.16210, 3.63916),
    (0.7, 7.83151, 3.77154),
    (0.8, 7.57411, 3.89942),
    (0.9, 7.36769, 4.02324),
)

#: normalisation constants for exported traces
ETA0 = 0.4     # characteristic wave height [m]
T0 = 2.747     # characteristic time [s] (wavelength / celerity at H = 0.4)


def scenario_catalogue():
    """The six piston configurations: (H, wavelength, celerity) per wave height."""
    return [tuple(row) for row in WAVE_CATALOGUE]


@dataclass(frozen=True)
class GaugeSpec:
    id: str
    x_position: float
    sampling_dt: float = 0.02


@dataclass
class GaugeTrace:
    """Free-surface elevation history at one gauge; eta is relative to still water."""

    times: np.ndarray
    eta: np.ndarray
    gauge_id: str = ""
    eta0: float = ETA0
    t0: float = T0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        if self.times.shape != self.eta.shape:
            raise ValueError("times and eta must have equal length")

    @property
    def t_normalized(self) -> np.ndarray:
        return self.times / self.t0

    @property
    def eta_normalized(self) -> np.ndarray:
        return self.eta / self.eta0

    def peak(self) -> float:
        return float(self.eta.max())


def default_gauges() -> tuple:
    """WG1-10 layout.

    The flume schematic does not tabulate gauge coordinates, so these are
    estimates: WG1-3 on the flat bed, WG4-6 on the slope, WG7 at the start
    of the terrace, WG8 just upstream of the structure, WG9-10 downstream.
    Override per scenario when exact positions matter.
    """
    return (
        GaugeSpec("WG1", 8.0), GaugeSpec("WG2", 11.0), GaugeSpec("WG3", 14.0),
        GaugeSpec("WG4", 16.5), GaugeSpec("WG5", 19.0), GaugeSpec("WG6", 21.0),
        GaugeSpec("WG7", 22.3), GaugeSpec("WG8", 22.7),
        GaugeSpec("WG9", 24.5), GaugeSpec("WG10", 26.0),
    )


@dataclass
class FlumeScenario:
    flat_bed_length: float = 14.05
    slope_ratio: float = 0.1            # rise/run
    slope_run: float = 7.95
    terrace_height: float = 0.795
    terrace_length: float = 8.0
    structure_offset_from_slope_end: float = 0.79
    structure_width_x: float = 0.4
    structure_height: float = 0.5
    structure_width_y: float = 0.4      # out-of-plane width used for force scaling
    still_water_depth: float = 0.75
    wave_height: float = 0.4
    dp: float = 0.1
    duration: float = 12.0
    has_structure: bool = True
    piston_freeboard_factor: float = 1.5
    wall_layers: int = 2
    gauges: tuple = field(default_factory=default_gauges)

    @property
    def domain_length(self) -> float:
        return self.flat_bed_length + self.slope_run + self.terrace_length

    @property
    def structure_x_front(self) -> float:
        return self.flat_bed_length + self.slope_run + self.structure_offset_from_slope_end

    @property
    def structure_box(self):
        """(x0, x1, z0, z1) of the structure footprint in the slice plane."""
        x0 = self.structure_x_front
        z0 = self.bed_elevation(x0)
        return (x0, x0 + self.structure_width_x, z0, z0 + self.structure_height)

    def bed_elevation(self, x) -> float:
        """Piecewise-linear bed profile, connected from x = 0 to the flume end."""
        x = np.asarray(x, dtype=float)
        flat_end = self.flat_bed_length
        slope_end = flat_end + self.slope_run
        z = np.where(x <= flat_end, 0.0,
                     np.where(x <= slope_end, (x - flat_end) * self.slope_ratio,
                              self.terrace_height))
        return float(z) if z.ndim == 0 else z


def build_scenario(**overrides) -> FlumeScenario:
    """Scenario with paper defaults; validates geometry and resolution."""
    scn = replace(FlumeScenario(), **overrides) if overrides else FlumeScenario()
    for name in ("flat_bed_length", "wave_height", "dp", "structure_width_x",
                 "structure_height", "structure_width_y", "duration"):
        if getattr(scn, name) <= 0.0:
            raise InvalidGeometry(f"{name} must be positive, got {getattr(scn, name)}")
    for name in ("slope_run", "terrace_length", "terrace_height",
                 "structure_offset_from_slope_end", "slope_ratio",
                 "still_water_depth"):  # zero still water = dry flume
        if getattr(scn, name) < 0.0:
            raise InvalidGeometry(f"{name} must be non-negative, got {getattr(scn, name)}")
    if scn.slope_run > 0.0:
        implied = scn.slope_ratio * scn.slope_run
        if abs(implied - scn.terrace_height) > 1e-9:
            raise InvalidGeometry(
                f"slope rise {implied:.6f} m does not meet the terrace at "
                f"{scn.terrace_height:.6f} m")
    elif scn.terrace_height != 0.0:
        raise InvalidGeometry("terrace_height must be 0 when there is no slope")
    if scn.wave_height + 1e-12 < 4.0 * scn.dp:
        raise ResolutionTooCoarse(
            f"H/dp = {scn.wave_height / scn.dp:.2f} < 4; refine dp or raise H")
    for g in scn.gauges:
        if not (0.0 <= g.x_position <= scn.domain_length):
            raise InvalidGeometry(f"gauge {g.id} at x={g.x_position} outside the flume")
    return scn


# ---------------------------------------------------------------------------
# Particle seeding
# ---------------------------------------------------------------------------

def hydrostatic_density(z, depth: float, consts: FluidConstants):
    """Density profile consistent with the EOS under a hydrostatic column."""
    z = np.asarray(z, dtype=float)
    head = np.clip(depth - z, 0.0, None)
    rho = consts.rho0 * (1.0 + consts.rho0 * consts.g * head
                         / consts.b_stiffness) ** (1.0 / consts.gamma)
    return float(rho) if rho.ndim == 0 else rho


def _polyline_layers(points_fn, length, dp, n_layers, normal_fn):
    """Sample a parametric curve at spacing dp in n_layers staggered rows.

    points_fn(s) -> (x, z) on the surface, normal_fn(s) -> outward (away from
    fluid) unit normal.  Layer l sits l*dp along the normal, with alternate
    layers shifted half a spacing tangentially.
    """
    pts = []
    n_pts = int(math.floor(length / dp + 1e-9)) + 1
    for layer in range(n_layers):
        stagger = 0.5 * dp if layer % 2 else 0.0
        s = stagger
        count = n_pts if layer % 2 == 0 else n_pts - 1
        for _ in range(count):
            x, z = points_fn(min(s, length))
            nx, nz = normal_fn(min(s, length))
            pts.append((x + layer * dp * nx, z + layer * dp * nz))
            s += dp
    return pts


@dataclass
class StructureSurface:
    """Boundary particles forming the box perimeter, with force normals.

    Pressure loads are integrated over the outermost layer only (`surface`
    mask); inner layers support the boundary condition but carry no area.
    """

    indices: np.ndarray      # rows in the particle arrays
    normals: np.ndarray      # (n, 2) unit vectors pointing into the box
    surface: np.ndarray      # (n,) bool: True for the outermost layer
    box: tuple               # (x0, x1, z0, z1)


@dataclass
class FlumeSetup:
    """Seeded simulation plus the handles needed to drive and probe it."""

    state: SimState
    scenario: FlumeScenario
    kernel: KernelConfig
    constants: FluidConstants
    piston: Optional[PistonMotion]
    structure: Optional[StructureSurface]
    trajectory: Optional[RayleighPiston]


def _seed_structure(scn: FlumeScenario, dp: float, n_layers: int):
    """Perimeter particles for the box: left, top and right faces."""
    x0, x1, z0, z1 = scn.structure_box
    pts, normals, surface = [], [], []

    def face(px_fn, length, inward):
        n_pts = int(math.floor(length / dp + 1e-9)) + 1
        for layer in range(n_layers):
            stagger = 0.5 * dp if layer % 2 else 0.0
            count = n_pts if layer % 2 == 0 else n_pts - 1
            s = stagger
            for _ in range(count):
                x, z = px_fn(min(s, length))
                pts.append((x + layer * dp * inward[0], z + layer * dp * inward[1]))
                normals.append(inward)
                surface.append(layer == 0)
                s += dp

    height = z1 - z0
    # side faces stop short of the top corner; the top face owns the corners
    face(lambda s: (x0, z0 + s), height - dp, (1.0, 0.0))
    face(lambda s: (x1, z0 + s), height - dp, (-1.0, 0.0))
    face(lambda s: (x0 + s, z1), x1 - x0, (0.0, -1.0))
    return pts, normals, surface


def seed_particles(scn: FlumeScenario, consts: Optional[FluidConstants] = None,
                   kernel: Optional[KernelConfig] = None) -> FlumeSetup:
    """Discretise the scenario into fluid, wall and piston particles.

    Fluid sits on a regular dp lattice between the bed profile and the still
    water line, with the hydrostatic density profile of the EOS.  Walls (bed,
    slope, terrace, downstream wall, structure perimeter) are staggered
    dynamic-boundary layers; the piston column at x = 0 spans the still water
    depth plus a 1.5 H freeboard.
    """
    if consts is None:
        ref_depth = scn.still_water_depth if scn.still_water_depth > 0.0 \
            else scn.wave_height
        consts = FluidConstants.for_still_depth(ref_depth)
    if kernel is None:
        kernel = KernelConfig.from_dp(scn.dp)
    dp = scn.dp
    layers = scn.wall_layers
    d = scn.still_water_depth
    length = scn.domain_length

    pts, kinds = [], []

    # bed polyline from a little behind the paddle to the flume end
    x_start = -3.0 * dp
    seg = [(x_start, 0.0), (scn.flat_bed_length, 0.0)]
    if scn.slope_run > 0.0:
        seg.append((scn.flat_bed_length + scn.slope_run, scn.terrace_height))
    if scn.terrace_length > 0.0:
        seg.append((length, scn.terrace_height))
    seg = np.asarray(seg)
    lens = np.hypot(np.diff(seg[:, 0]), np.diff(seg[:, 1]))
    cum = np.concatenate([[0.0], np.cumsum(lens)])

    def bed_point(s):
        i = min(np.searchsorted(cum, s, side="right") - 1, len(lens) - 1)
        f = (s - cum[i]) / lens[i]
        return (seg[i, 0] + f * (seg[i + 1, 0] - seg[i, 0]),
                seg[i, 1] + f * (seg[i + 1, 1] - seg[i, 1]))

    def bed_normal(s):
        i = min(np.searchsorted(cum, s, side="right") - 1, len(lens) - 1)
        tx, tz = (seg[i + 1] - seg[i]) / lens[i]
        return (tz, -tx)  # outward = downward, away from the fluid

    for p in _polyline_layers(bed_point, float(cum[-1]), dp, layers, bed_normal):
        pts.append(p)
        kinds.append(WALL_FIXED)

    # downstream end wall
    wall_top = d + max(1.5 * scn.wave_height, 0.5)
    z_end = scn.bed_elevation(length)
    n_wall = int(math.floor((wall_top - z_end) / dp)) + 1
    for layer in range(layers):
        stagger = 0.5 * dp if layer % 2 else 0.0
        count = n_wall if layer % 2 == 0 else n_wall - 1
        for j in range(count):
            z = z_end + dp + stagger + j * dp
            pts.append((length + layer * dp, z))
            kinds.append(WALL_FIXED)

    # piston column at x = 0; it reaches below bed level to seal the foot
    # (boundary-boundary pairs do not interact, so overlapping the bed is safe)
    piston_top = d + scn.piston_freeboard_factor * scn.wave_height
    z_foot = -float(layers) * dp
    n_pist = int(math.floor((piston_top - z_foot) / dp)) + 1
    piston_first = len(pts)
    for layer in range(layers):
        stagger = 0.5 * dp if layer % 2 else 0.0
        count = n_pist if layer % 2 == 0 else n_pist - 1
        for j in range(count):
            pts.append((-layer * dp, z_foot + stagger + j * dp))
            kinds.append(WALL_PISTON)
    piston_idx = np.arange(piston_first, len(pts))

    # structure perimeter
    structure = None
    if scn.has_structure:
        s_pts, s_normals, s_surface = _seed_structure(scn, dp, layers)
        s_first = len(pts)
        pts.extend(s_pts)
        kinds.extend([WALL_FIXED] * len(s_pts))
        structure = StructureSurface(indices=np.arange(s_first, len(pts)),
                                     normals=np.asarray(s_normals, dtype=float),
                                     surface=np.asarray(s_surface, dtype=bool),
                                     box=scn.structure_box)

    # fluid lattice
    box = scn.structure_box if scn.has_structure else None
    n_cols = int(math.floor((length - dp) / dp + 1e-9))
    for i in range(1, n_cols + 1):
        x = i * dp
        zb = float(scn.bed_elevation(x))
        col_depth = d - zb
        if col_depth <= 0.5 * dp:
            continue
        n_rows = int(math.floor(col_depth / dp + 1e-9))
        for j in range(1, n_rows + 1):
            z = zb + j * dp
            if box is not None and (box[0] - 0.5 * dp < x < box[1] + 0.5 * dp
                                    and z < box[3] + 0.5 * dp):
                continue
            pts.append((x, z))
            kinds.append(FLUID)

    pos = np.asarray(pts, dtype=float)
    kind = np.asarray(kinds, dtype=np.uint8)
    n = len(pts)
    vel = np.zeros((n, 2))
    rho = np.full(n, consts.rho0)
    wet = pos[:, 1] <= d
    rho[wet] = hydrostatic_density(pos[wet, 1], d, consts)
    mass = np.full(n, consts.rho0 * dp * dp)

    grid = CellGrid.for_bbox(x_start - dp, length + layers * dp,
                             -layers * dp, wall_top + 1.0,
                             kernel.support_radius)
    state = SimState(pos=pos, vel=vel, rho=rho, mass=mass, kind=kind, grid=grid)

    if d > 0.0:
        trajectory = RayleighPiston(wave_height=scn.wave_height, depth=d,
                                    gravity=consts.g)
        piston = PistonMotion(displacement=trajectory.displacement,
                              velocity=trajectory.velocity,
                              indices=piston_idx,
                              x_seed=pos[piston_idx, 0].copy())
    else:  # dry flume: the paddle has nothing to push
        trajectory = None
        piston = PistonMotion(displacement=lambda t: 0.0,
                              velocity=lambda t: 0.0,
                              indices=piston_idx,
                              x_seed=pos[piston_idx, 0].copy())
    return FlumeSetup(state=state, scenario=scn, kernel=kernel, constants=consts,
                      piston=piston, structure=structure, trajectory=trajectory)


def build_hydrostatic_tank(width: float, depth: float, dp: float,
                           consts: Optional[FluidConstants] = None,
                           wall_layers: int = 2,
                           freeboard: float = 0.2):
    """Closed rectangular tank with hydrostatically seeded fluid.

    Returns (state, kernel, constants).  Used by relaxation and wall-load
    checks; the tank has a bed at z = 0 and side walls at x = 0 and x = width.
    """
    if consts is None:
        consts = FluidConstants.for_still_depth(depth)
    kernel = KernelConfig.from_dp(dp)
    pts, kinds = [], []
    wall_top = depth + freeboard

    n_bed = int(math.floor((width + 6.0 * dp) / dp)) + 1
    for layer in range(wall_layers):
        stagger = 0.5 * dp if layer % 2 else 0.0
        count = n_bed if layer % 2 == 0 else n_bed - 1
        for j in range(count):
            pts.append((-3.0 * dp + stagger + j * dp, -layer * dp))
            kinds.append(WALL_FIXED)
    n_side = int(math.floor(wall_top / dp)) + 1
    for x_wall, sgn in ((0.0, -1.0), (width, 1.0)):
        for layer in range(wall_layers):
            stagger = 0.5 * dp if layer % 2 else 0.0
            count = n_side if layer % 2 == 0 else n_side - 1
            for j in range(count):
                pts.append((x_wall + sgn * layer * dp, dp + stagger + j * dp))
                kinds.append(WALL_FIXED)

    n_cols = int(math.floor((width - dp) / dp + 1e-9))
    n_rows = int(math.floor(depth / dp + 1e-9))
    for i in range(1, n_cols + 1):
        for j in range(1, n_rows + 1):
            pts.append((i * dp, j * dp))
            kinds.append(FLUID)

    pos = np.asarray(pts, dtype=float)
    kind = np.asarray(kinds, dtype=np.uint8)
    n = len(pts)
    rho = np.full(n, consts.rho0)
    wet = pos[:, 1] <= depth
    rho[wet] = hydrostatic_density(pos[wet, 1], depth, consts)
    state = SimState(
        pos=pos, vel=np.zeros((n, 2)), rho=rho,
        mass=np.full(n, consts.rho0 * dp * dp), kind=kind,
        grid=CellGrid.for_bbox(-4.0 * dp, width + 4.0 * dp, -4.0 * dp,
                               wall_top + 0.5, kernel.support_radius))
    return state, kernel, consts


def build_wall_load_tank(width: float, depth: float, dp: float,
                         box_width: float = 0.4, box_height: float = 1.2,
                         consts: Optional[FluidConstants] = None,
                         wall_layers: int = 2):
    """Tank whose downstream end is a box structure: water loads one face only.

    Returns (state, kernel, constants, structure).  The box stands on the bed
    with its upstream face at x = width and reaches above the water line, so
    the hydrostatic load on it is width_y * rho0 g depth^2 / 2.
    """
    if consts is None:
        consts = FluidConstants.for_still_depth(depth)
    kernel = KernelConfig.from_dp(dp)
    pts, kinds = [], []
    wall_top = depth + 0.2

    n_bed = int(math.floor((width + box_width + 6.0 * dp) / dp)) + 1
    for layer in range(wall_layers):
        stagger = 0.5 * dp if layer % 2 else 0.0
        count = n_bed if layer % 2 == 0 else n_bed - 1
        for j in range(count):
            pts.append((-3.0 * dp + stagger + j * dp, -layer * dp))
            kinds.append(WALL_FIXED)
    n_side = int(math.floor(wall_top / dp)) + 1
    for layer in range(wall_layers):
        stagger = 0.5 * dp if layer % 2 else 0.0
        count = n_side if layer % 2 == 0 else n_side - 1
        for j in range(count):
            pts.append((-layer * dp, dp + stagger + j * dp))
            kinds.append(WALL_FIXED)

    box = (width, width + box_width, 0.0, box_height)
    s_pts, s_normals, s_surface = [], [], []

    def face(px_fn, length, inward):
        n_pts = int(math.floor(length / dp + 1e-9)) + 1
        for layer in range(wall_layers):
            stagger = 0.5 * dp if layer % 2 else 0.0
            count = n_pts if layer % 2 == 0 else n_pts - 1
            s = stagger
            for _ in range(count):
                x, z = px_fn(min(s, length))
                s_pts.append((x + layer * dp * inward[0], z + layer * dp * inward[1]))
                s_normals.append(inward)
                s_surface.append(layer == 0)
                s += dp

    face(lambda s: (box[0], dp + s), box_height - 2.0 * dp, (1.0, 0.0))
    face(lambda s: (box[1], dp + s), box_height - 2.0 * dp, (-1.0, 0.0))
    face(lambda s: (box[0] + s, box_height), box_width, (0.0, -1.0))
    s_first = len(pts)
    pts.extend(s_pts)
    kinds.extend([WALL_FIXED] * len(s_pts))
    structure = StructureSurface(indices=np.arange(s_first, len(pts)),
                                 normals=np.asarray(s_normals, dtype=float),
                                 surface=np.asarray(s_surface, dtype=bool),
                                 box=box)

    n_cols = int(math.floor((width - dp) / dp + 1e-9))
    n_rows = int(math.floor(depth / dp + 1e-9))
    for i in range(1, n_cols + 1):
        for j in range(1, n_rows + 1):
            pts.append((i * dp, j * dp))
            kinds.append(FLUID)

    pos = np.asarray(pts, dtype=float)
    kind = np.asarray(kinds, dtype=np.uint8)
    n = len(pts)
    rho = np.full(n, consts.rho0)
    wet = pos[:, 1] <= depth
    rho[wet] = hydrostatic_density(pos[wet, 1], depth, consts)
    state = SimState(
        pos=pos, vel=np.zeros((n, 2)), rho=rho,
        mass=np.full(n, consts.rho0 * dp * dp), kind=kind,
        grid=CellGrid.for_bbox(-4.0 * dp, width + box_width + 4.0 * dp,
                               -4.0 * dp, max(wall_top, box_height) + 0.5,
                               kernel.support_radius))
    return state, kernel, consts, structure


def sample_gauge(state: SimState, gauge: GaugeSpec, scn: FlumeScenario,
                 half_width_dp: float = 2.0) -> float:
    """Surface elevation eta [m] above still water at the gauge column.

    Takes the highest fluid particle within +/- half_width_dp * dp of the
    gauge; a dry column reports -still_water_depth.
    """
    f = state.fluid_indices
    x = state.pos[f, 0]
    half = half_width_dp * scn.dp
    in_col = np.abs(x - gauge.x_position) <= half
    if not in_col.any():
        return -scn.still_water_depth
    return float(state.pos[f[in_col], 1].max() - scn.still_water_depth)

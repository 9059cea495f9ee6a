"""
Scene geometry: corridor, transmitter, reflector panel and LiDAR placement,
plus the mirror-plane kernel (image points, finite-aperture crossings and
unfolded specular path lengths).

Frame: origin at the inner vertex of the L-corridor corner, x along the
transmitter leg, y along the NLoS leg, z up.  The panel is a zero-thickness
plane; its material only changes the reflection loss.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Mapping

import numpy as np

from .constants import PLANE_TOLERANCE
from .errors import GeometryError, ParameterError


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ParameterError(f"non-finite point ({self.x}, {self.y}, {self.z})")

    @classmethod
    def from_array(cls, values) -> 'Point3':
        return cls(float(values[0]), float(values[1]), float(values[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def with_z(self, z: float) -> 'Point3':
        return Point3(self.x, self.y, z)


class MaterialKind(Enum):
    SILVER = 'Silver'
    COPPER = 'Copper'
    SILVER_COATED_MIRROR = 'SilverCoatedMirror'
    FOAM = 'Foam'

    @classmethod
    def parse(cls, name: str) -> 'MaterialKind':
        for kind in cls:
            if kind.value.lower() == name.strip().lower():
                return kind
        raise ParameterError(f"unknown material '{name}' (expected one of {', '.join(k.value for k in cls)})")


# Silver is the reference; copper and the silver-coated mirror measured equal
DEFAULT_REFLECTION_LOSS: Dict[MaterialKind, float] = {
    MaterialKind.SILVER: 0.0,
    MaterialKind.COPPER: 1.0,
    MaterialKind.SILVER_COATED_MIRROR: 1.0,
    MaterialKind.FOAM: 12.0,
}


def validate_loss_table(losses: Mapping[MaterialKind, float]) -> None:
    """Enforce Silver < Copper = SilverCoatedMirror < Foam"""
    missing = [k.value for k in MaterialKind if k not in losses]
    if missing:
        raise ParameterError(f"reflection loss missing for {', '.join(missing)}")
    silver = losses[MaterialKind.SILVER]
    copper = losses[MaterialKind.COPPER]
    mirror = losses[MaterialKind.SILVER_COATED_MIRROR]
    foam = losses[MaterialKind.FOAM]
    if not (silver < copper == mirror < foam):
        raise ParameterError(
            f"reflection losses must satisfy Silver < Copper = SilverCoatedMirror < Foam, "
            f"got {silver}, {copper}, {mirror}, {foam}"
        )


@dataclass(frozen=True)
class ReflectorPanel:
    """
    Flat rectangular reflector.

    `center` gives the plan position; the rectangle is centered at
    (center.x, center.y, mount_height).  `azimuth` is the angle in degrees
    between the panel's horizontal edge and the +x axis.
    """
    center: Point3
    azimuth: float = 45.0
    width: float = 0.9
    height: float = 0.3
    mount_height: float = 1.35
    material: MaterialKind = MaterialKind.SILVER_COATED_MIRROR

    def __post_init__(self):
        if not self.width > 0 or not self.height > 0:
            raise ParameterError(f"panel size must be positive, got {self.width} x {self.height}")
        if not 0.0 < self.azimuth < 90.0:
            raise ParameterError(f"panel azimuth must lie in (0, 90) degrees, got {self.azimuth}")
        if not math.isfinite(self.mount_height):
            raise ParameterError(f"non-finite mount height {self.mount_height}")

    @property
    def centroid(self) -> np.ndarray:
        return np.array([self.center.x, self.center.y, self.mount_height], dtype=float)

    @property
    def direction(self) -> np.ndarray:
        """Horizontal in-plane unit vector"""
        a = math.radians(self.azimuth)
        return np.array([math.cos(a), math.sin(a), 0.0])

    @property
    def normal(self) -> np.ndarray:
        a = math.radians(self.azimuth)
        return np.array([math.sin(a), -math.cos(a), 0.0])

    def signed_distance(self, p) -> float:
        return float(np.dot(np.asarray(p, dtype=float) - self.centroid, self.normal))

    def resized(self, width: float, height: float) -> 'ReflectorPanel':
        return replace(self, width=width, height=height)

    def with_material(self, material: MaterialKind) -> 'ReflectorPanel':
        return replace(self, material=material)


def _default_panel() -> ReflectorPanel:
    return ReflectorPanel(center=Point3(2.05, -2.05, 0.0))


@dataclass(frozen=True)
class SceneConfig:
    corridor_width: float = 2.5
    tx_position: Point3 = Point3(-1.75, -1.25, 1.5)
    rx_height: float = 1.5
    lidar_position: Point3 = Point3(-1.75, -1.25, 1.5)
    panel: ReflectorPanel = field(default_factory=_default_panel)
    carrier_frequency: float = 60e9
    reflection_losses: Mapping[MaterialKind, float] = field(
        default_factory=lambda: dict(DEFAULT_REFLECTION_LOSS))

    def __post_init__(self):
        if not self.corridor_width > 0:
            raise ParameterError(f"corridor_width must be positive, got {self.corridor_width}")
        if not self.carrier_frequency > 0:
            raise ParameterError(f"carrier_frequency must be positive, got {self.carrier_frequency}")
        validate_loss_table(self.reflection_losses)
        if self.panel.signed_distance(self.tx_position.as_array()) >= -PLANE_TOLERANCE:
            raise GeometryError("transmitter must sit in front of the reflector panel")

    @property
    def reflection_loss(self) -> float:
        """Loss of the configured panel material in dB"""
        return float(self.reflection_losses[self.panel.material])

    def with_panel(self, panel: ReflectorPanel) -> 'SceneConfig':
        return replace(self, panel=panel)


def _as_vector(p) -> np.ndarray:
    if isinstance(p, Point3):
        return p.as_array()
    return np.asarray(p, dtype=float)


def image_point(p, panel: ReflectorPanel):
    """
    Mirror image of p across the infinite plane containing the panel.

    Accepts a Point3 (returns a Point3) or an (..., 3) array (returns an array).
    """
    v = _as_vector(p)
    n = panel.normal
    d = (v - panel.centroid) @ n
    mirrored = v - 2.0 * np.multiply.outer(d, n)
    if isinstance(p, Point3):
        return Point3.from_array(mirrored)
    return mirrored


def segment_intersects_panel(a, b, panel: ReflectorPanel) -> bool:
    """
    True iff the open segment (a, b) crosses the finite panel rectangle.

    Endpoints within PLANE_TOLERANCE of the plane do not count as crossings.
    """
    va, vb = _as_vector(a), _as_vector(b)
    if np.array_equal(va, vb):
        raise GeometryError(f"degenerate segment: both endpoints at {tuple(va)}")

    n = panel.normal
    c = panel.centroid
    da = float((va - c) @ n)
    db = float((vb - c) @ n)
    if not ((da < -PLANE_TOLERANCE and db > PLANE_TOLERANCE) or
            (da > PLANE_TOLERANCE and db < -PLANE_TOLERANCE)):
        return False

    t = da / (da - db)
    hit = va + t * (vb - va) - c
    along = abs(float(hit @ panel.direction))
    up = abs(float(hit[2]))
    return along <= panel.width / 2.0 and up <= panel.height / 2.0


def _check_same_side(tx: np.ndarray, rx: np.ndarray, panel: ReflectorPanel) -> None:
    dt = panel.signed_distance(tx)
    dr = panel.signed_distance(rx)
    if (dt < -PLANE_TOLERANCE and dr > PLANE_TOLERANCE) or (dt > PLANE_TOLERANCE and dr < -PLANE_TOLERANCE):
        raise GeometryError("transmitter and receiver lie on opposite sides of the mirror plane")


def path_length_via_panel(tx, rx, panel: ReflectorPanel) -> float:
    """Unfolded specular path length |image(tx) - rx| in meters"""
    vt, vr = _as_vector(tx), _as_vector(rx)
    _check_same_side(vt, vr, panel)
    return float(np.linalg.norm(image_point(vt, panel) - vr))


def specular_point(tx, rx, panel: ReflectorPanel) -> np.ndarray:
    """Point on the mirror plane where the tx -> rx specular ray reflects"""
    vt, vr = _as_vector(tx), _as_vector(rx)
    _check_same_side(vt, vr, panel)
    image = image_point(vt, panel)
    di = panel.signed_distance(image)
    dr = panel.signed_distance(vr)
    if abs(di - dr) <= PLANE_TOLERANCE:
        # both on the plane
        return vr
    t = di / (di - dr)
    return image + t * (vr - image)

"""
Sampling-time settings for structure and property guidance
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from molforge.chem.descriptors import DIRECTIONS, MAXIMIZE, MINIMIZE, TARGET
from molforge.errors import ConfigError

WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PropertyTarget:
    """
    One property goal.

    :param descriptor: descriptor id
    :param direction: ``maximize``, ``minimize`` or ``target``
    :param value: set point, required for ``target``
    :param weight: lambda multiplying this predictor's gradient
    """

    descriptor: str
    direction: str = MAXIMIZE
    value: Optional[float] = None
    weight: float = 1.0

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if self.direction == TARGET and self.value is None:
            raise ConfigError(f"target for {self.descriptor} needs a value")
        if self.weight < 0:
            raise ConfigError(f"weight of {self.descriptor} must be non-negative, got {self.weight}")

    @classmethod
    def parse(cls, text: str) -> "PropertyTarget":
        """
        Read ``descriptor:direction[:lambda]`` or ``descriptor:value[:lambda]``.

        >>> PropertyTarget.parse("HBD:maximize:2")
        PropertyTarget(descriptor='HBD', direction='maximize', value=None, weight=2.0)
        >>> PropertyTarget.parse("MolWeight:180")
        PropertyTarget(descriptor='MolWeight', direction='target', value=180.0, weight=1.0)
        """
        parts = [part.strip() for part in text.split(":")]
        if len(parts) not in (2, 3) or not parts[0]:
            raise ConfigError(f"property target {text!r} is not descriptor:direction[:lambda]")
        try:
            weight = float(parts[2]) if len(parts) == 3 else 1.0
            if parts[1] in (MAXIMIZE, MINIMIZE):
                return cls(parts[0], parts[1], None, weight)
            return cls(parts[0], TARGET, float(parts[1]), weight)
        except ValueError as exc:
            raise ConfigError(f"property target {text!r} is not descriptor:direction[:lambda]") from exc

    def __str__(self) -> str:
        goal = self.direction if self.direction != TARGET else f"{self.value:g}"
        return f"{self.descriptor}:{goal}:{self.weight:g}"


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class GuidanceConfig:
    """
    :param w_s: weight of the unconditional branch in the structure module
    :param w_p: weight of the unconditional branch in the property module
    :param t2_boundary: last step of phase one is ``t2_boundary + 1``, ``0.75 T`` when ``None``
    :param scaffold: scaffold SMILES, structure guidance is off when ``None``
    :param targets: property goals, property guidance is off when empty
    :param sigma_g: guidance temperature of the Gaussian likelihood
    :param kappa: margin in corpus standard deviations for directional goals
    :param normalize_gradients: rescale every property gradient to the norm of the unconditional prediction
    :param clamp_x0: snap the fused prediction to its rounded embedding before each reverse step
    :param trace_every: record an intermediate decode every this many steps, 0 for none
    """

    w_s: float = 0.5
    w_p: float = 0.5
    t2_boundary: Optional[int] = None
    scaffold: Optional[str] = None
    targets: Tuple[PropertyTarget, ...] = field(default_factory=tuple)
    sigma_g: float = 1.0
    kappa: float = 2.0
    normalize_gradients: bool = True
    clamp_x0: bool = False
    trace_every: int = 0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        for name in ("w_s", "w_p"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must be in [0, 1], got {getattr(self, name)}")
        if self.scaffold is not None and self.targets and abs(self.w_s - (1 - self.w_p)) > WEIGHT_TOLERANCE:
            raise ConfigError(f"with both modules active w_s must equal 1 - w_p, got w_s={self.w_s}, w_p={self.w_p}")
        if self.t2_boundary is not None and self.t2_boundary < 0:
            raise ConfigError(f"t2_boundary must be non-negative, got {self.t2_boundary}")
        if self.sigma_g <= 0:
            raise ConfigError(f"sigma_g must be positive, got {self.sigma_g}")
        if self.kappa < 0:
            raise ConfigError(f"kappa must be non-negative, got {self.kappa}")
        if self.trace_every < 0:
            raise ConfigError(f"trace_every must be non-negative, got {self.trace_every}")
        names = [target.descriptor for target in self.targets]
        if len(set(names)) != len(names):
            raise ConfigError(f"each descriptor may be targeted once, got {names}")

    @property
    def structure_active(self) -> bool:
        return self.scaffold is not None

    @property
    def property_active(self) -> bool:
        return bool(self.targets)

    def boundary(self, steps: int) -> int:
        """Phase two covers ``t <= boundary``"""
        boundary = int(0.75 * steps) if self.t2_boundary is None else self.t2_boundary
        if boundary > steps:
            raise ConfigError(f"t2_boundary {boundary} exceeds the {steps} diffusion steps")
        return boundary

    def to_dict(self) -> Dict[str, Any]:
        return {
            "w_s": self.w_s,
            "w_p": self.w_p,
            "t2_boundary": self.t2_boundary,
            "scaffold": self.scaffold,
            "targets": [str(target) for target in self.targets],
            "sigma_g": self.sigma_g,
            "kappa": self.kappa,
            "normalize_gradients": self.normalize_gradients,
            "clamp_x0": self.clamp_x0,
            "trace_every": self.trace_every,
        }

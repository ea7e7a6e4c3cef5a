"""Run configuration: documented keys, defaults, and file parsing.

Config files are flat ``key = value`` text, one pair per line, with
``#`` comments and blank lines allowed.  Unknown or duplicate keys are
errors so typos cannot silently fall back to defaults.  Every key has
the default recorded in :class:`SimConfig`; the README carries the full
table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

from .base_station import BsParams
from .channel import OpticalLinkBudget, WaterProfile
from .geometry import DepthModel, Position
from .node import UwnParams

__all__ = ["ConfigError", "SimConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid configuration file or parameter combination."""


@dataclass(frozen=True)
class SimConfig:
    # deployment
    n_uwn: int = 50
    region_east_m: float = 200.0
    region_north_m: float = 200.0
    region_depth_m: float = 200.0
    bs_east_m: float = 100.0
    bs_north_m: float = 100.0
    # water column
    c0: float = 0.056
    gamma: float = 0.0
    sound_speed_mps: float = 1500.0
    # optical link budget
    tx_power_w: float = 0.1
    divergence_half_angle_deg: float = 1.0
    rx_aperture_area_m2: float = 7.854e-3
    rx_sensitivity_w: float = 2.5e-12
    rx_fov_half_angle_deg: float = 30.0
    # acoustic reach and imperfection knobs
    acoustic_range_m: float = 1000.0
    p_misdetect: float = 0.0
    p_frame_loss: float = 0.0
    sonar_depth_noise_std_m: float = 0.0
    # depth sounding resolution delta(z) = delta0 + kappa*z
    depth_resolution_surface_m: float = 0.5
    depth_resolution_gradient: float = 0.005
    # protocol timing
    superframe_period_s: float = 1.0
    first_superframe_offset_s: float = 0.1
    direct_retries: int = 5
    relay_retries: int = 5
    conflict_reset_after_s: float = 5.0
    # conflict movement and return
    v_min_mps: float = 0.05
    v_max_mps: float = 0.5
    move_duration_min_s: float = 1.0
    move_duration_max_s: float = 3.0
    v_return_mps: float = 0.5
    return_tolerance_m: float = 0.1
    match_on_motion_marker: bool = True
    # ambient drift
    current_east_mps: float = 0.0
    current_north_mps: float = 0.0
    # run control
    t_max_s: float = 50.0
    seed: int = 0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        c = self
        def need(cond: bool, msg: str) -> None:
            if not cond:
                raise ConfigError(msg)

        need(c.n_uwn >= 0, f"n_uwn must be >= 0, got {c.n_uwn}")
        for name in ("region_east_m", "region_north_m", "region_depth_m"):
            need(getattr(c, name) > 0, f"{name} must be positive")
        need(0 <= c.bs_east_m <= c.region_east_m,
             f"bs_east_m {c.bs_east_m} outside region")
        need(0 <= c.bs_north_m <= c.region_north_m,
             f"bs_north_m {c.bs_north_m} outside region")
        need(c.c0 > 0, f"c0 must be positive, got {c.c0}")
        need(c.c0 + c.gamma * c.region_depth_m > 0,
             "attenuation c0 + gamma*z must stay positive over the region")
        need(c.sound_speed_mps > 0, "sound_speed_mps must be positive")
        need(c.tx_power_w > 0, "tx_power_w must be positive")
        need(0 < c.divergence_half_angle_deg < 90,
             "divergence_half_angle_deg must be in (0, 90)")
        need(c.rx_aperture_area_m2 > 0, "rx_aperture_area_m2 must be positive")
        need(c.rx_sensitivity_w > 0, "rx_sensitivity_w must be positive")
        need(0 < c.rx_fov_half_angle_deg <= 90,
             "rx_fov_half_angle_deg must be in (0, 90]")
        need(c.acoustic_range_m > 0, "acoustic_range_m must be positive")
        for name in ("p_misdetect", "p_frame_loss"):
            need(0 <= getattr(c, name) <= 1, f"{name} must be in [0, 1]")
        need(c.sonar_depth_noise_std_m >= 0,
             "sonar_depth_noise_std_m must be >= 0")
        need(c.depth_resolution_surface_m > 0,
             "depth_resolution_surface_m must be positive")
        need(c.depth_resolution_gradient >= 0,
             "depth_resolution_gradient must be >= 0")
        need(c.superframe_period_s > 0, "superframe_period_s must be positive")
        need(c.first_superframe_offset_s >= 0,
             "first_superframe_offset_s must be >= 0")
        need(c.direct_retries >= 1, "direct_retries must be >= 1")
        need(c.relay_retries >= 1, "relay_retries must be >= 1")
        need(c.conflict_reset_after_s > 0,
             "conflict_reset_after_s must be positive")
        need(0 <= c.v_min_mps <= c.v_max_mps,
             "need 0 <= v_min_mps <= v_max_mps")
        need(c.v_max_mps > 0, "v_max_mps must be positive")
        need(0 < c.move_duration_min_s <= c.move_duration_max_s,
             "need 0 < move_duration_min_s <= move_duration_max_s")
        need(c.v_return_mps > 0, "v_return_mps must be positive")
        need(c.return_tolerance_m >= 0, "return_tolerance_m must be >= 0")
        need(c.t_max_s > 0, "t_max_s must be positive")
        for name in ("current_east_mps", "current_north_mps"):
            need(math.isfinite(getattr(c, name)), f"{name} must be finite")

    # -- derived parameter bundles -----------------------------------------

    def bs_position(self) -> Position:
        return Position(self.bs_east_m, self.bs_north_m, 0.0)

    def water_profile(self) -> WaterProfile:
        return WaterProfile(c0=self.c0, gamma=self.gamma,
                            sound_speed=self.sound_speed_mps)

    def link_budget(self) -> OpticalLinkBudget:
        return OpticalLinkBudget(
            tx_power=self.tx_power_w,
            divergence_half_angle=math.radians(self.divergence_half_angle_deg),
            rx_aperture_area=self.rx_aperture_area_m2,
            rx_sensitivity=self.rx_sensitivity_w,
            rx_fov_half_angle=math.radians(self.rx_fov_half_angle_deg))

    def depth_model(self) -> DepthModel:
        return DepthModel(self.depth_resolution_surface_m,
                          self.depth_resolution_gradient)

    def uwn_params(self) -> UwnParams:
        return UwnParams(
            v_min=self.v_min_mps, v_max=self.v_max_mps,
            move_duration_min=self.move_duration_min_s,
            move_duration_max=self.move_duration_max_s,
            v_return=self.v_return_mps,
            return_tolerance=self.return_tolerance_m,
            match_on_motion_marker=self.match_on_motion_marker,
            region_depth=self.region_depth_m)

    def bs_params(self) -> BsParams:
        return BsParams(
            bs_position=self.bs_position(),
            depth_model=self.depth_model(),
            sonar_radius=self.acoustic_range_m,
            p_misdetect=self.p_misdetect,
            depth_noise_std=self.sonar_depth_noise_std_m,
            direct_retries=self.direct_retries,
            relay_retries=self.relay_retries,
            conflict_reset_after=self.conflict_reset_after_s)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELD_TYPES = {f.name: f.type for f in fields(SimConfig)}


def _parse_value(key: str, raw: str):
    ftype = _FIELD_TYPES[key]
    if ftype == "bool":
        lowered = raw.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ConfigError(f"key '{key}': expected true/false, got '{raw}'")
    if ftype == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"key '{key}': expected an integer, got '{raw}'") from None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key '{key}': expected a number, got '{raw}'") from None


def parse_config(text: str, source: str = "<string>") -> SimConfig:
    """Parse ``key = value`` config text into a validated SimConfig."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', "
                              f"got '{stripped}'")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        if not raw:
            raise ConfigError(f"{source}:{lineno}: empty value for '{key}'")
        values[key] = _parse_value(key, raw)
    try:
        return SimConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path) -> SimConfig:
    """Read and parse a config file; missing files are configuration errors."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), source=str(path))

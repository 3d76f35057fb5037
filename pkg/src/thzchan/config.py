"""Scenario configuration: YAML loading, strict validation with key paths,
round-trip serialization, and conversion to the domain parameter objects.

Keys carry their units as suffixes (``_m``, ``_hz``, ``_rad``, ``_s``,
``_db``, ``_mps``) because unit mistakes are the dominant failure mode in
channel simulators.
"""

from __future__ import annotations

import dataclasses
import math
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .cir import PATTERNS, BandPlan
from .clusters import AngleSector, ClusterLaw
from .errors import ConfigError
from .evolution import BirthDeathParams, PowerLaw
from .geometry import ArrayGeometry, MotionState, PanelOrientation
from .largescale import AbsorptionTable, LargeScaleParams, load_absorption_csv


@dataclass
class BandConfig:
    f_start_hz: float
    f_stop_hz: float
    n_sub: int
    f_c_hz: float | None = None

    def validate(self):
        if self.f_stop_hz <= self.f_start_hz:
            raise ConfigError("f_stop_hz must exceed f_start_hz")
        if self.n_sub < 1:
            raise ConfigError("n_sub must be at least 1")


@dataclass
class LinkConfig:
    distance_m: float
    k_factor: float = 0.0
    los_phase: str = "uniform"

    def validate(self):
        if self.distance_m <= 0.0:
            raise ConfigError("distance_m must be positive")
        if self.k_factor < 0.0:
            raise ConfigError("k_factor must be non-negative")
        if self.los_phase not in ("uniform", "distance_locked"):
            raise ConfigError("los_phase must be 'uniform' or 'distance_locked'")


@dataclass
class PanelConfig:
    m_v: int
    m_h: int
    delta_v_m: float = 0.0
    delta_h_m: float = 0.0
    beta_v_e_rad: float = 0.0
    beta_v_a_rad: float = 0.0
    beta_h_e_rad: float = 0.0
    beta_h_a_rad: float = 0.0
    gamma_x_rad: float = 0.0
    gamma_y_rad: float = 0.0
    gamma_z_rad: float = 0.0

    def validate(self):
        if self.m_v < 1 or self.m_h < 1:
            raise ConfigError("m_v and m_h must be positive")
        if self.m_v > 1 and self.delta_v_m <= 0.0:
            raise ConfigError("delta_v_m must be positive")
        if self.m_h > 1 and self.delta_h_m <= 0.0:
            raise ConfigError("delta_h_m must be positive")


@dataclass
class ArraysConfig:
    tx: PanelConfig = field(default_factory=lambda: PanelConfig(1, 1))
    rx: PanelConfig = field(default_factory=lambda: PanelConfig(1, 1))

    def validate(self):
        pass


@dataclass
class MotionConfig:
    speed_mps: float = 0.0
    alpha_e_rad: float = 0.0
    alpha_a_rad: float = 0.0

    def validate(self):
        if self.speed_mps < 0.0:
            raise ConfigError("speed_mps must be non-negative")


@dataclass
class MotionsConfig:
    tx: MotionConfig = field(default_factory=MotionConfig)
    rx: MotionConfig = field(default_factory=MotionConfig)

    def validate(self):
        pass


@dataclass
class SnapshotConfig:
    count: int = 1
    delta_t_s: float = 1e-3

    def validate(self):
        if self.count < 1:
            raise ConfigError("snapshot count must be at least 1")
        if self.delta_t_s <= 0.0:
            raise ConfigError("delta_t_s must be positive")


@dataclass
class ClustersConfig:
    initial_count: int | None = None
    d_bar_n_m: float = 1.5
    center_std_az_tx_rad: float = 0.0
    center_std_el_tx_rad: float = 0.0
    center_std_az_rx_rad: float = 0.0
    center_std_el_rx_rad: float = 0.0
    sector_az_tx_rad: tuple[float, float] = (-math.pi, math.pi)
    sector_el_tx_rad: tuple[float, float] = (-math.pi / 4, math.pi / 4)
    sector_az_rx_rad: tuple[float, float] = (-math.pi, math.pi)
    sector_el_rx_rad: tuple[float, float] = (-math.pi / 4, math.pi / 4)
    sigma_az_tx_rad: float = math.radians(2.8)
    sigma_el_tx_rad: float = math.radians(1.4)
    sigma_az_rx_rad: float = math.radians(1.7)
    sigma_el_rx_rad: float = math.radians(1.2)
    shadow_sigma_db: float = 3.0
    ray_count: int | None = 50
    ray_lambda: float = 20.0
    single_bounce_prob: float = 1.0
    r_c_lo: float = 0.2
    r_c_hi: float = 0.8
    xpr_mean_db: float = 9.0
    xpr_std_db: float = 0.0
    freq_exp_mean: float = 0.0
    freq_exp_std: float = 0.0

    def validate(self):
        if self.initial_count is not None and self.initial_count < 1:
            raise ConfigError("initial_count must be at least 1 when set")
        if self.d_bar_n_m <= 0.0:
            raise ConfigError("d_bar_n_m must be positive")
        for name in ("sigma_az_tx_rad", "sigma_el_tx_rad", "sigma_az_rx_rad",
                     "sigma_el_rx_rad", "shadow_sigma_db", "xpr_std_db",
                     "freq_exp_std"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be non-negative")
        if self.ray_count is not None and self.ray_count < 1:
            raise ConfigError("ray_count must be at least 1 when set")
        if self.ray_lambda <= 0.0:
            raise ConfigError("ray_lambda must be positive")
        if not 0.0 <= self.single_bounce_prob <= 1.0:
            raise ConfigError("single_bounce_prob must lie in [0, 1]")
        if not 0.0 < self.r_c_lo < self.r_c_hi < 1.0:
            raise ConfigError("need 0 < r_c_lo < r_c_hi < 1")
        for name in ("sector_az_tx_rad", "sector_el_tx_rad",
                     "sector_az_rx_rad", "sector_el_rx_rad"):
            lo, hi = getattr(self, name)
            if hi <= lo:
                raise ConfigError(f"{name} bounds must satisfy lo < hi")


@dataclass
class BirthDeathConfig:
    lambda_g: float = 0.8
    lambda_r: float = 0.04
    d_c_a_m: float = 10.0
    d_c_s_m: float = 30.0
    b_c_f_hz: float = 10e9
    rho_s: float = 1.0

    def validate(self):
        for name in dataclasses.asdict(self):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be strictly positive")


@dataclass
class PowerConfig:
    ds_s: float = 10e-9
    r_tau: float = 2.3
    xi_sigma: float = 0.0
    xi_mu: float = 0.0
    n_sinusoids: int = 10
    spatial_freq_max_rad_per_m: float = 100.0

    def validate(self):
        if self.ds_s <= 0.0:
            raise ConfigError("ds_s must be positive")
        if self.r_tau <= 1.0:
            raise ConfigError("r_tau must exceed 1")
        if self.n_sinusoids < 1:
            raise ConfigError("n_sinusoids must be at least 1")


@dataclass
class LargeScaleConfig:
    pl0_db: float | None = None
    gamma: float = 2.0
    ref_distance_m: float = 1.0
    sh_sigma_db: float = 0.0
    sh_per_subband: bool = False
    blockage_mode: str = "constant"
    blockage_db: float = 0.0
    blockage_prob: float = 0.0
    absorption_mode: str = "flat"
    absorption_db_per_m: float = 0.0
    absorption_file: str | None = None

    def validate(self):
        if self.ref_distance_m <= 0.0:
            raise ConfigError("ref_distance_m must be positive")
        if self.sh_sigma_db < 0.0:
            raise ConfigError("sh_sigma_db must be non-negative")
        if self.blockage_mode not in ("constant", "two_state"):
            raise ConfigError("blockage_mode must be 'constant' or 'two_state'")
        if not 0.0 <= self.blockage_prob <= 1.0:
            raise ConfigError("blockage_prob must lie in [0, 1]")
        if self.absorption_mode not in ("flat", "file"):
            raise ConfigError("absorption_mode must be 'flat' or 'file'")
        if self.absorption_mode == "file" and not self.absorption_file:
            raise ConfigError("absorption_file required for absorption_mode 'file'")
        if self.absorption_db_per_m < 0.0:
            raise ConfigError("absorption_db_per_m must be non-negative")


@dataclass
class SubarrayConfig:
    min_path_distance_m: float = 4.0
    share_within_block: bool = False

    def validate(self):
        if self.min_path_distance_m <= 0.0:
            raise ConfigError("min_path_distance_m must be positive")


@dataclass
class StatsConfig:
    estimators: tuple[str, ...] = ()
    c_th: float = 0.9
    delay_bin_s: float = 1e-10
    angle_bin_deg: float = 1.0
    anchors_hz: tuple[float, ...] = ()
    max_element_offset: int = 8

    KNOWN = (
        "acf",
        "fcf",
        "sccf",
        "delay_spread",
        "angle_spread",
        "stationary_bandwidth",
        "stationary_interval",
        "stationary_distance",
    )

    def validate(self):
        for name in self.estimators:
            if name not in self.KNOWN:
                raise ConfigError(f"unknown estimator '{name}'")
        if not 0.0 < self.c_th < 1.0:
            raise ConfigError("c_th must lie in (0, 1)")
        if self.delay_bin_s <= 0.0:
            raise ConfigError("delay_bin_s must be positive")
        if self.max_element_offset < 0:
            raise ConfigError("max_element_offset must be non-negative")


@dataclass
class ExportConfig:
    cir: bool = False
    cir_format: str = "bin"

    def validate(self):
        if self.cir_format not in ("bin", "csv"):
            raise ConfigError("cir_format must be 'bin' or 'csv'")


@dataclass
class SimulationConfig:
    band: BandConfig
    link: LinkConfig
    seed: int = 0
    realizations: int = 1
    pattern: str = "isotropic"
    arrays: ArraysConfig = field(default_factory=ArraysConfig)
    motion: MotionsConfig = field(default_factory=MotionsConfig)
    snapshots: SnapshotConfig = field(default_factory=SnapshotConfig)
    clusters: ClustersConfig = field(default_factory=ClustersConfig)
    birth_death: BirthDeathConfig = field(default_factory=BirthDeathConfig)
    power: PowerConfig = field(default_factory=PowerConfig)
    largescale: LargeScaleConfig = field(default_factory=LargeScaleConfig)
    subarray: SubarrayConfig = field(default_factory=SubarrayConfig)
    stats: StatsConfig = field(default_factory=StatsConfig)
    export: ExportConfig = field(default_factory=ExportConfig)

    def validate(self):
        if self.realizations < 0:
            raise ConfigError("realizations must be non-negative")
        if self.pattern not in PATTERNS:
            raise ConfigError(
                f"pattern must be one of {sorted(PATTERNS)}, got '{self.pattern}'"
            )

    # conversions to domain objects -------------------------------------

    def band_plan(self) -> BandPlan:
        return BandPlan(
            self.band.f_start_hz, self.band.f_stop_hz, self.band.n_sub,
            self.band.f_c_hz,
        )

    def _array(self, panel: PanelConfig) -> ArrayGeometry:
        return ArrayGeometry(
            m_v=panel.m_v,
            m_h=panel.m_h,
            delta_v=panel.delta_v_m,
            delta_h=panel.delta_h_m,
            orientation=PanelOrientation(
                beta_v_e=panel.beta_v_e_rad,
                beta_v_a=panel.beta_v_a_rad,
                beta_h_e=panel.beta_h_e_rad,
                beta_h_a=panel.beta_h_a_rad,
            ),
            rotation=(panel.gamma_x_rad, panel.gamma_y_rad, panel.gamma_z_rad),
        )

    def tx_array(self) -> ArrayGeometry:
        return self._array(self.arrays.tx)

    def rx_array(self) -> ArrayGeometry:
        return self._array(self.arrays.rx)

    def tx_motion(self) -> MotionState:
        m = self.motion.tx
        return MotionState(m.speed_mps, m.alpha_e_rad, m.alpha_a_rad)

    def rx_motion(self) -> MotionState:
        m = self.motion.rx
        return MotionState(m.speed_mps, m.alpha_e_rad, m.alpha_a_rad)

    def cluster_law(self) -> ClusterLaw:
        c = self.clusters
        return ClusterLaw(
            d_bar_n=c.d_bar_n_m,
            center_std_az_tx=c.center_std_az_tx_rad,
            center_std_el_tx=c.center_std_el_tx_rad,
            center_std_az_rx=c.center_std_az_rx_rad,
            center_std_el_rx=c.center_std_el_rx_rad,
            sector_az_tx=AngleSector(*c.sector_az_tx_rad),
            sector_el_tx=AngleSector(*c.sector_el_tx_rad),
            sector_az_rx=AngleSector(*c.sector_az_rx_rad),
            sector_el_rx=AngleSector(*c.sector_el_rx_rad),
            sigma_az_tx=c.sigma_az_tx_rad,
            sigma_el_tx=c.sigma_el_tx_rad,
            sigma_az_rx=c.sigma_az_rx_rad,
            sigma_el_rx=c.sigma_el_rx_rad,
            shadow_sigma_db=c.shadow_sigma_db,
            ray_count=c.ray_count,
            ray_lambda=c.ray_lambda,
            single_bounce_prob=c.single_bounce_prob,
            r_c_lo=c.r_c_lo,
            r_c_hi=c.r_c_hi,
            xpr_mean_db=c.xpr_mean_db,
            xpr_std_db=c.xpr_std_db,
            freq_exp_mean=c.freq_exp_mean,
            freq_exp_std=c.freq_exp_std,
        )

    def birth_death_params(self) -> BirthDeathParams:
        b = self.birth_death
        return BirthDeathParams(
            lambda_g=b.lambda_g,
            lambda_r=b.lambda_r,
            d_c_a=b.d_c_a_m,
            d_c_s=b.d_c_s_m,
            b_c_f=b.b_c_f_hz,
            rho_s=b.rho_s,
        )

    def power_law(self) -> PowerLaw:
        p = self.power
        return PowerLaw(
            ds=p.ds_s,
            r_tau=p.r_tau,
            xi_sigma=p.xi_sigma,
            xi_mu=p.xi_mu,
            n_sinusoids=p.n_sinusoids,
            spatial_freq_max=p.spatial_freq_max_rad_per_m,
        )

    def largescale_params(self, base_dir: Path | None = None) -> LargeScaleParams:
        ls = self.largescale
        if ls.absorption_mode == "file":
            path = Path(ls.absorption_file)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            table = load_absorption_csv(path)
        else:
            table = AbsorptionTable.flat(ls.absorption_db_per_m)
        return LargeScaleParams(
            pl0_db=ls.pl0_db,
            gamma=ls.gamma,
            ref_distance_m=ls.ref_distance_m,
            sh_sigma_db=ls.sh_sigma_db,
            blockage_db=ls.blockage_db,
            absorption=table,
        )


def _coerce(value, hint, path):
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin in (typing.Union, types.UnionType):
        if value is None:
            if type(None) in args:
                return None
            raise ConfigError(f"{path}: value must not be null")
        non_none = [a for a in args if a is not type(None)]
        return _coerce(value, non_none[0], path)
    if dataclasses.is_dataclass(hint):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected a mapping")
        return _from_dict(hint, value, path)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected a list")
        item_hint = args[0]
        return tuple(_coerce(v, item_hint, f"{path}[{i}]") for i, v in enumerate(value))
    if hint is float:
        if isinstance(value, str):
            # YAML 1.1 reads exponents like 300.0e9 as strings
            try:
                return float(value)
            except ValueError:
                raise ConfigError(f"{path}: expected a number, got {value!r}") from None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean, got {value!r}")
        return value
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    return value


def _from_dict(cls, data: dict, path: str = ""):
    hints = typing.get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            where = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown key '{where}'")
    kwargs = {}
    for f in dataclasses.fields(cls):
        key_path = f"{path}.{f.name}" if path else f.name
        if f.name in data:
            kwargs[f.name] = _coerce(data[f.name], hints[f.name], key_path)
        elif (
            f.default is dataclasses.MISSING
            and f.default_factory is dataclasses.MISSING
        ):
            raise ConfigError(f"missing required key '{key_path}'")
    try:
        obj = cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path or cls.__name__}: {exc}") from exc
    return obj


def _validate_tree(obj, path: str = ""):
    if hasattr(obj, "validate"):
        try:
            obj.validate()
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}" if path else str(exc)) from None
    if dataclasses.is_dataclass(obj):
        for f in dataclasses.fields(obj):
            child = getattr(obj, f.name)
            if dataclasses.is_dataclass(child):
                _validate_tree(child, f"{path}.{f.name}" if path else f.name)


def config_from_dict(data: dict) -> SimulationConfig:
    if not isinstance(data, dict):
        raise ConfigError("top-level configuration must be a mapping")
    config = _from_dict(SimulationConfig, data)
    _validate_tree(config)
    return config


def _to_plain(value):
    if dataclasses.is_dataclass(value):
        return {
            f.name: _to_plain(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    if isinstance(value, tuple):
        return [_to_plain(v) for v in value]
    return value


def config_to_dict(config: SimulationConfig) -> dict:
    return _to_plain(config)


def load_config(path) -> SimulationConfig:
    with open(path) as handle:
        data = yaml.safe_load(handle)
    if data is None:
        raise ConfigError(f"{path}: empty configuration")
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def save_config(config: SimulationConfig, path) -> None:
    with open(path, "w") as handle:
        yaml.safe_dump(config_to_dict(config), handle, sort_keys=True)

"""Line-oriented `key = value` configuration with [section] headers.

Sections and keys are a closed set; anything unknown is rejected with its
line number.  dump_config() emits the canonical form (fixed section and
key order, repr() floats), and parsing the canonical form reproduces it
byte-identically.
"""

from dataclasses import dataclass

__all__ = ["SimConfig", "ConfigError", "parse_config", "dump_config"]

IC_PRESETS = ("zero", "gaussian_blob", "radial", "manufactured")
FORCING_PRESETS = ("none", "constant", "rotating_dipole")
INTERPOLATION_MODES = ("cubic", "monotone")


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    # [model]
    n_layers: int = 3
    froude: float = 1.0
    # [grid]
    n_r: int = 64
    n_theta: int = 128
    # [time]
    dt: float = 0.01
    t_end: float = 1.0
    # [solver]
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    interpolation: str = "cubic"
    # [ic]
    ic_preset: str = "gaussian_blob"
    ic_amplitude: float = 1.0
    ic_center_x: float = 0.3
    ic_center_y: float = 0.0
    ic_width: float = 0.18
    ic_power: int = 2
    ic_layer_weights: tuple = ()
    # [forcing]
    forcing_preset: str = "none"
    forcing_amplitude: float = 0.0
    forcing_frequency: float = 1.0
    forcing_layer_weights: tuple = ()
    # [output]
    directory: str = "out"
    snapshot_every: int = 0
    diagnostics_every: int = 1
    seed: int = 0

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(1 <= self.n_layers <= 16, f"n_layers out of range: {self.n_layers}")
        need(self.froude > 0.0, f"froude must be positive: {self.froude}")
        need(8 <= self.n_r <= 512, f"n_r out of supported range: {self.n_r}")
        need(
            16 <= self.n_theta <= 1024 and self.n_theta % 2 == 0,
            f"n_theta must be even and in [16, 1024]: {self.n_theta}",
        )
        need(self.dt > 0.0, f"dt must be positive: {self.dt}")
        need(self.t_end > 0.0, f"t_end must be positive: {self.t_end}")
        need(self.picard_tol > 0.0, f"picard_tol must be positive: {self.picard_tol}")
        need(
            self.picard_max_iter >= 1,
            f"picard_max_iter must be >= 1: {self.picard_max_iter}",
        )
        need(
            self.interpolation in INTERPOLATION_MODES,
            f"interpolation must be one of {INTERPOLATION_MODES}: {self.interpolation}",
        )
        need(
            self.ic_preset in IC_PRESETS,
            f"ic preset must be one of {IC_PRESETS}: {self.ic_preset}",
        )
        need(
            self.forcing_preset in FORCING_PRESETS,
            f"forcing preset must be one of {FORCING_PRESETS}: {self.forcing_preset}",
        )
        need(self.ic_width > 0.0, f"ic width must be positive: {self.ic_width}")
        need(self.ic_power >= 1, f"ic power must be >= 1: {self.ic_power}")
        need(
            self.ic_center_x**2 + self.ic_center_y**2 < 1.0,
            "ic center must lie inside the unit disk",
        )
        for name, weights in (
            ("ic", self.ic_layer_weights),
            ("forcing", self.forcing_layer_weights),
        ):
            need(
                len(weights) in (0, self.n_layers),
                f"{name} layer_weights needs 0 or n_layers={self.n_layers} "
                f"entries, got {len(weights)}",
            )
        need(self.snapshot_every >= 0, "snapshot_every must be >= 0")
        need(self.diagnostics_every >= 1, "diagnostics_every must be >= 1")
        need(self.seed >= 0, "seed must be >= 0")
        need(len(self.directory) > 0, "output directory must be non-empty")
        return self


def _parse_weights(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(float(part) for part in text.split(","))


def _dump_weights(weights):
    return ",".join(repr(float(w)) for w in weights)


# section -> key -> (attribute, parse, dump)
_SCHEMA = {
    "model": {
        "n_layers": ("n_layers", int, str),
        "froude": ("froude", float, repr),
    },
    "grid": {
        "n_r": ("n_r", int, str),
        "n_theta": ("n_theta", int, str),
    },
    "time": {
        "dt": ("dt", float, repr),
        "t_end": ("t_end", float, repr),
    },
    "solver": {
        "picard_tol": ("picard_tol", float, repr),
        "picard_max_iter": ("picard_max_iter", int, str),
        "interpolation": ("interpolation", str, str),
    },
    "ic": {
        "preset": ("ic_preset", str, str),
        "amplitude": ("ic_amplitude", float, repr),
        "center_x": ("ic_center_x", float, repr),
        "center_y": ("ic_center_y", float, repr),
        "width": ("ic_width", float, repr),
        "power": ("ic_power", int, str),
        "layer_weights": ("ic_layer_weights", _parse_weights, _dump_weights),
    },
    "forcing": {
        "preset": ("forcing_preset", str, str),
        "amplitude": ("forcing_amplitude", float, repr),
        "frequency": ("forcing_frequency", float, repr),
        "layer_weights": ("forcing_layer_weights", _parse_weights, _dump_weights),
    },
    "output": {
        "directory": ("directory", str, str),
        "snapshot_every": ("snapshot_every", int, str),
        "diagnostics_every": ("diagnostics_every", int, str),
        "seed": ("seed", int, str),
    },
}


def parse_config(text):
    """Parse configuration text into a validated SimConfig."""
    config = SimConfig()
    section = None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{name}]")
            section = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {raw!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside of any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if (section, key) in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{section}]")
        seen.add((section, key))
        attr, parse, _ = _SCHEMA[section][key]
        try:
            setattr(config, attr, parse(value))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return config.validate()


def dump_config(config):
    """Canonical text form; parse_config(dump_config(c)) reproduces c."""
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (attr, _, dump) in keys.items():
            lines.append(f"{key} = {dump(getattr(config, attr))}")
        lines.append("")
    return "\n".join(lines)

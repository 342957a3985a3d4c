"""Built-in two-component benchmark signals and the expression compiler for
config-defined components.

Every preset uses unit amplitudes and a 30 s / 100 Hz grid.  The first three
keep the two instantaneous frequencies pointwise separated while their ranges
overlap, which is exactly the regime where a fixed-band filter cannot isolate
either component; the fourth makes the frequencies cross mid-signal and is a
robustness case only.  Formulas (t in seconds, angles in cycles):

example1 / example2 (example2 adds noise for ~1.7 dB SNR):
    f1(t) = 1.15 + 0.055 t + 0.38 sin(2 pi 0.26 t)         range [0.77, 3.18]
    f2(t) = 2.45 * f1(t)                                   range [1.89, 7.79]

example3 (quadratic sweep family, noise for ~1.93 dB SNR):
    f1(t) = 1.10 + 1.9 (t/30)^2 + 0.26 sin(2 pi 0.22 t)    range [0.84, 3.26]
    f2(t) = 2.70 + 4.6 (t/30)^2 + 0.64 sin(2 pi 0.22 t)    range [2.06, 7.94]

example4 (crossing frequencies, noise for ~3.13 dB SNR):
    f1(t) = 2.10 + 0.120 t                                 range [2.10, 5.70]
    f2(t) = 5.90 - 0.125 t                                 range [2.15, 5.90]

The proportional pair in example1 keeps the pointwise frequency ratio pinned
at 1/2.45 ~ 0.41, so the adaptive filter separates the components everywhere
while the fast modulation defeats a fixed 377-sample analysis window.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigError
from .signals import Grid, IMTSpec

_EXPRESSION_NAMES: dict[str, object] = {
    "pi": np.pi,
    "e": np.e,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "log10": np.log10,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "tanh": np.tanh,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "arctan": np.arctan,
    "minimum": np.minimum,
    "maximum": np.maximum,
    "where": np.where,
    "sign": np.sign,
}


def compile_expression(expression: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile a ``t``-expression (numpy semantics) into a vectorized callable."""
    try:
        code = compile(expression, "<component-expression>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad expression {expression!r}: {exc}") from exc
    for name in code.co_names:
        if name not in _EXPRESSION_NAMES and name != "t":
            raise ConfigError(f"expression {expression!r} uses unknown name {name!r}")

    def evaluate(t: np.ndarray) -> np.ndarray:
        namespace = dict(_EXPRESSION_NAMES)
        namespace["t"] = t
        result = eval(code, {"__builtins__": {}}, namespace)  # noqa: S307 - names whitelisted
        return np.broadcast_to(np.asarray(result, dtype=float), np.shape(t)).copy()

    return evaluate


def component_from_strings(amplitude: str, phase: str,
                           frequency: str | None = None) -> IMTSpec:
    """Build a component from expression strings; the optional ``frequency``
    string is cross-checked against the phase by finite differences."""
    amp = compile_expression(amplitude)
    phi = compile_expression(phase)
    probe = IMTSpec(amplitude=amp, phase=phi, epsilon=0.0,
                    phase_second_derivative_bound=0.0)
    # epsilon/M'' are estimated on the default grid; strings carry no analytic form
    grid = Grid(3000, 100.0)
    freq_fd = probe.frequency_on(grid)
    if frequency is not None:
        freq_fn = compile_expression(frequency)
        stated = freq_fn(grid.times())
        err = np.max(np.abs(stated - freq_fd)) / max(np.max(np.abs(stated)), 1e-12)
        if err > 1e-2:
            raise ConfigError(
                "frequency expression disagrees with the phase derivative "
                f"(relative mismatch {err:.3g})"
            )
    eps, m2 = _estimate_regularity(probe, grid)
    return IMTSpec(amplitude=amp, phase=phi, epsilon=eps,
                   phase_second_derivative_bound=m2)


def _estimate_regularity(spec: IMTSpec, grid: Grid) -> tuple[float, float]:
    freq = spec.frequency_on(grid)
    amp = spec.amplitude_on(grid)
    amp_rate = np.gradient(amp, grid.dt)
    freq_rate = np.gradient(freq, grid.dt)
    floor = np.maximum(freq, 1e-9)
    eps = float(max(np.max(np.abs(amp_rate) / floor), np.max(np.abs(freq_rate) / floor)))
    return eps * 1.02 + 1e-9, float(np.max(np.abs(freq_rate)) * 1.02 + 1e-12)


def _sinusoidal_sweep(base: float, slope: float, wiggle: float,
                      modulation_hz: float) -> tuple[Callable, Callable, float]:
    """Frequency ``base + slope t + wiggle sin(2 pi fm t)`` and its phase."""
    omega = 2.0 * np.pi * modulation_hz

    def frequency(t: np.ndarray) -> np.ndarray:
        return base + slope * t + wiggle * np.sin(omega * t)

    def phase(t: np.ndarray) -> np.ndarray:
        return base * t + 0.5 * slope * t**2 + (wiggle / omega) * (1.0 - np.cos(omega * t))

    m2 = abs(slope) + abs(wiggle) * omega
    return frequency, phase, m2


def _quadratic_sweep(base: float, gain: float, span: float, wiggle: float,
                     modulation_hz: float) -> tuple[Callable, Callable, float]:
    """Frequency ``base + gain (t/span)^2 + wiggle sin(2 pi fm t)``."""
    omega = 2.0 * np.pi * modulation_hz

    def frequency(t: np.ndarray) -> np.ndarray:
        return base + gain * (t / span) ** 2 + wiggle * np.sin(omega * t)

    def phase(t: np.ndarray) -> np.ndarray:
        return base * t + gain * t**3 / (3.0 * span**2) + (wiggle / omega) * (1.0 - np.cos(omega * t))

    m2 = 2.0 * abs(gain) / span + abs(wiggle) * omega
    return frequency, phase, m2


def _linear_component(base: float, slope: float) -> tuple[Callable, Callable, float]:
    def frequency(t: np.ndarray) -> np.ndarray:
        return base + slope * np.asarray(t, dtype=float)

    def phase(t: np.ndarray) -> np.ndarray:
        return base * t + 0.5 * slope * t**2

    return frequency, phase, abs(slope)


def _unit_amplitude(t: np.ndarray) -> np.ndarray:
    return np.ones_like(np.asarray(t, dtype=float))


def _make_component(frequency: Callable, phase: Callable, m2: float,
                    grid: Grid) -> IMTSpec:
    freq = frequency(grid.times())
    freq_rate = np.gradient(freq, grid.dt)
    eps = float(np.max(np.abs(freq_rate) / np.maximum(freq, 1e-9))) * 1.02 + 1e-9
    return IMTSpec(amplitude=_unit_amplitude, phase=phase, epsilon=eps,
                   phase_second_derivative_bound=m2)


@dataclass(frozen=True)
class Preset:
    """A named benchmark signal: components lowest-frequency first."""

    name: str
    components: tuple[IMTSpec, ...]
    frequencies: tuple[Callable, ...]
    noise_sd: float
    duration: float = 30.0
    sample_rate: float = 100.0
    separation_ok: bool = True
    description: str = ""

    def grid(self) -> Grid:
        return Grid(int(round(self.duration * self.sample_rate)), self.sample_rate)


def _build_example1(noise_sd: float, name: str) -> Preset:
    grid = Grid(3000, 100.0)
    kappa = 2.45
    f1, p1, m2_1 = _sinusoidal_sweep(1.15, 0.055, 0.38, 0.26)
    f2, p2, m2_2 = _sinusoidal_sweep(kappa * 1.15, kappa * 0.055, kappa * 0.38, 0.26)
    return Preset(
        name=name,
        components=(_make_component(f1, p1, m2_1, grid), _make_component(f2, p2, m2_2, grid)),
        frequencies=(f1, f2),
        noise_sd=noise_sd,
        description="proportional modulated sweeps; frequency ranges overlap, "
                    "pointwise ratio pinned at ~0.41",
    )


def _build_example3() -> Preset:
    grid = Grid(3000, 100.0)
    f1, p1, m2_1 = _quadratic_sweep(1.10, 1.9, 30.0, 0.26, 0.22)
    f2, p2, m2_2 = _quadratic_sweep(2.70, 4.6, 30.0, 0.64, 0.22)
    return Preset(
        name="example3",
        components=(_make_component(f1, p1, m2_1, grid), _make_component(f2, p2, m2_2, grid)),
        frequencies=(f1, f2),
        noise_sd=10 ** (-1.93 / 20.0),
        description="quadratic sweeps with sinusoidal modulation; "
                    "frequency ranges overlap, pointwise ratio ~0.41",
    )


def _build_example4() -> Preset:
    grid = Grid(3000, 100.0)
    f1, p1, m2_1 = _linear_component(2.10, 0.120)
    f2, p2, m2_2 = _linear_component(5.90, -0.125)
    return Preset(
        name="example4",
        components=(_make_component(f1, p1, m2_1, grid), _make_component(f2, p2, m2_2, grid)),
        frequencies=(f1, f2),
        noise_sd=10 ** (-3.13 / 20.0),
        separation_ok=False,
        description="linear sweeps whose frequencies cross mid-signal "
                    "(robustness case, no accuracy claim)",
    )


def get_preset(name: str) -> Preset:
    """Look up a preset; example2 is example1 plus noise at ~1.7 dB SNR."""
    builders = {
        "example1": lambda: _build_example1(0.0, "example1"),
        "example2": lambda: _build_example1(10 ** (-1.7 / 20.0), "example2"),
        "example3": _build_example3,
        "example4": _build_example4,
    }
    if name not in builders:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(builders)}")
    return builders[name]()


def preset_schema(name: str) -> Mapping[str, object]:
    """Formula documentation embedded in config echoes and reports."""
    docs = {
        "example1": {
            "f1": "1.15 + 0.055*t + 0.38*sin(2*pi*0.26*t)",
            "f2": "2.45*(1.15 + 0.055*t + 0.38*sin(2*pi*0.26*t))",
            "noise_sd": 0.0,
        },
        "example2": {
            "f1": "1.15 + 0.055*t + 0.38*sin(2*pi*0.26*t)",
            "f2": "2.45*(1.15 + 0.055*t + 0.38*sin(2*pi*0.26*t))",
            "noise_sd": round(10 ** (-1.7 / 20.0), 6),
        },
        "example3": {
            "f1": "1.10 + 1.9*(t/30)**2 + 0.26*sin(2*pi*0.22*t)",
            "f2": "2.70 + 4.6*(t/30)**2 + 0.64*sin(2*pi*0.22*t)",
            "noise_sd": round(10 ** (-1.93 / 20.0), 6),
        },
        "example4": {
            "f1": "2.10 + 0.120*t",
            "f2": "5.90 - 0.125*t",
            "noise_sd": round(10 ** (-3.13 / 20.0), 6),
        },
    }
    if name not in docs:
        raise ConfigError(f"unknown preset {name!r}")
    return {"amplitudes": "1.0", **docs[name]}

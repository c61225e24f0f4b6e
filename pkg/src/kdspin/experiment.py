"""SI-unit estimates for an X-ray standing-wave spin-filter experiment.

Flat-top focal spot, rectangular temporal overlap. Everything here is SI;
the natural-unit bridge is :func:`xi_from_intensity`.
"""

import json
import math
from dataclasses import asdict, dataclass, field

from .constants import (
    ALPHA,
    ELECTRON_REST_ENERGY_EV,
    ELEMENTARY_CHARGE,
    REDUCED_COMPTON_WAVELENGTH,
    SPEED_OF_LIGHT,
    VACUUM_PERMITTIVITY,
    ELECTRON_MASS,
    HBAR,
    photon_energy_to_k,
    fs_to_natural,
)
from .errors import InvalidArgument

W_PER_CM2 = 1e4  # W/m^2 per W/cm^2


@dataclass(frozen=True)
class ExperimentConfig:
    """Beamline and electron-bunch parameters.

    ``optics_chain`` maps each beam (``"beam_1"`` moving along +x, ``"beam_2"``
    along -x) to an ordered list of ``[element, efficiency]`` pairs between
    the source and the focus. ``beam_intensities`` (W/m^2), when given,
    replaces the chain estimate in the probability.
    """

    peak_power: float
    pulse_duration: float
    focus_diameter: float
    photon_energy: float
    optics_chain: dict
    bunch_charge: float
    bunch_duration: float
    repetition_rate: float
    electron_kinetic_energy: float
    beam_intensities: tuple = None

    def __post_init__(self):
        for name in ("peak_power", "pulse_duration", "focus_diameter", "photon_energy",
                     "bunch_charge", "bunch_duration", "repetition_rate",
                     "electron_kinetic_energy"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidArgument(f"{name} must be a positive number, got {v!r}")
        if set(self.optics_chain) != {"beam_1", "beam_2"}:
            raise InvalidArgument("optics_chain needs exactly the keys beam_1 and beam_2")
        chain = {}
        for beam, elements in self.optics_chain.items():
            parsed = []
            for item in elements:
                if len(item) != 2:
                    raise InvalidArgument(f"{beam}: chain entries are [element, efficiency]")
                name, eff = item
                if not (isinstance(eff, (int, float)) and 0 < eff <= 1):
                    raise InvalidArgument(f"{beam}: efficiency of {name!r} must be in (0, 1]")
                parsed.append((str(name), float(eff)))
            chain[beam] = tuple(parsed)
        object.__setattr__(self, "optics_chain", chain)
        if self.beam_intensities is not None:
            vals = tuple(float(v) for v in self.beam_intensities)
            if len(vals) != 2 or min(vals) <= 0:
                raise InvalidArgument("beam_intensities must be two positive values (W/m^2)")
            object.__setattr__(self, "beam_intensities", vals)

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidArgument(f"unknown experiment fields: {sorted(unknown)}")
        missing = known - set(data) - {"beam_intensities"}
        if missing:
            raise InvalidArgument(f"missing experiment fields: {sorted(missing)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def reference_config():
    """X-ray free-electron-laser numbers used in the count-rate estimate."""
    return ExperimentConfig(
        peak_power=100e9,
        pulse_duration=20e-15,
        focus_diameter=100e-9,
        photon_energy=13e3,
        # element counts are not given; these balance the two beams near 1.2e20 W/cm^2
        optics_chain={
            "beam_1": [["splitter transmission", 0.34]] + [["mirror", 0.85]] * 8,
            "beam_2": [["splitter reflection", 0.56]] + [["mirror", 0.85]] * 7
                      + [["phase retarder", 0.55]],
        },
        bunch_charge=10e-15,
        bunch_duration=10e-12,
        repetition_rate=1e6,
        electron_kinetic_energy=212e3,
        beam_intensities=(1.2e20 * W_PER_CM2, 1.2e20 * W_PER_CM2),
    )


def focus_intensity(power, focus_diameter):
    """Peak intensity (W/m^2) for a flat-top spot of the given diameter."""
    if power <= 0 or focus_diameter <= 0:
        raise InvalidArgument("power and focus diameter must be positive")
    return power / (math.pi * (focus_diameter / 2) ** 2)


def chain_transmission(elements):
    t = 1.0
    for _, eff in elements:
        t *= eff
    return t


def beam_budget(cfg):
    """Per-beam intensities ``(I_1, I_2)`` at the focus after the optics chain."""
    i0 = focus_intensity(cfg.peak_power, cfg.focus_diameter)
    return (i0 * chain_transmission(cfg.optics_chain["beam_1"]),
            i0 * chain_transmission(cfg.optics_chain["beam_2"]))


def diffraction_probability_si(i_1, i_2, t, photon_energy):
    """Short-time diffraction probability; intensities in W/m^2, ``t`` in s, energy in eV.

    Uses the reduced Compton wavelength hbar / (m c).
    """
    for name, v in (("i_1", i_1), ("i_2", i_2), ("t", t), ("photon_energy", photon_energy)):
        if v < 0:
            raise InvalidArgument(f"{name} must be non-negative")
    if photon_energy == 0:
        raise InvalidArgument("photon_energy must be positive")
    e_photon = photon_energy * ELEMENTARY_CHARGE
    amp = (ALPHA * REDUCED_COMPTON_WAVELENGTH**2 / (8 * math.pi * math.sqrt(2))
           * math.sqrt(i_1 * i_2) * t / e_photon)
    return amp**2


def electron_momentum_ev(kinetic_energy):
    """``p c`` in eV for an electron of the given kinetic energy."""
    return math.sqrt(kinetic_energy**2 + 2 * kinetic_energy * ELECTRON_REST_ENERGY_EV)


def deflection_angle_deg(photon_energy, kinetic_energy):
    """Angle between the incoming and diffracted electron (two photon recoils)."""
    return math.degrees(math.atan2(2 * photon_energy, electron_momentum_ev(kinetic_energy)))


@dataclass
class ExperimentReport:
    focus_intensity: float
    chain_intensity_1: float
    chain_intensity_2: float
    intensity_1: float
    intensity_2: float
    probability: float
    electrons_per_window: float
    detections_per_second: float
    deflection_angle_deg: float
    electron_momentum_ev: float
    notes: list = field(default_factory=list)

    def to_dict(self):
        out = asdict(self)
        for key in ("focus_intensity", "chain_intensity_1", "chain_intensity_2",
                    "intensity_1", "intensity_2"):
            out[key + "_w_cm2"] = out[key] / W_PER_CM2
        return out


def count_rate(cfg):
    """Full pipeline: intensities, probability, electrons per window, rate, angle."""
    i0 = focus_intensity(cfg.peak_power, cfg.focus_diameter)
    c1, c2 = beam_budget(cfg)
    notes = []
    if cfg.beam_intensities is not None:
        i1, i2 = cfg.beam_intensities
        notes.append("probability uses the configured beam_intensities, not the chain estimate")
    else:
        i1, i2 = c1, c2
    prob = diffraction_probability_si(i1, i2, cfg.pulse_duration, cfg.photon_energy)
    electrons = (cfg.bunch_charge / ELEMENTARY_CHARGE) * (cfg.pulse_duration / cfg.bunch_duration)
    rate = electrons * prob * cfg.repetition_rate
    return ExperimentReport(
        focus_intensity=i0, chain_intensity_1=c1, chain_intensity_2=c2,
        intensity_1=i1, intensity_2=i2, probability=prob,
        electrons_per_window=electrons, detections_per_second=rate,
        deflection_angle_deg=deflection_angle_deg(cfg.photon_energy, cfg.electron_kinetic_energy),
        electron_momentum_ev=electron_momentum_ev(cfg.electron_kinetic_energy), notes=notes,
    )


def xi_from_intensity(intensity, photon_energy):
    """``e A / m`` of a beam with peak intensity ``I = eps0 c omega^2 A^2 / 2`` (W/m^2, eV)."""
    omega = photon_energy * ELEMENTARY_CHARGE / HBAR
    e_field = math.sqrt(2 * intensity / (VACUUM_PERMITTIVITY * SPEED_OF_LIGHT))
    return ELEMENTARY_CHARGE * e_field / (ELECTRON_MASS * SPEED_OF_LIGHT * omega)


def natural_unit_probability(i_1, i_2, t, photon_energy):
    """The same short-time estimate evaluated in natural units via :func:`xi_from_intensity`."""
    from .perturbation import short_time_probability

    return short_time_probability(
        xi_from_intensity(i_1, photon_energy), xi_from_intensity(i_2, photon_energy),
        photon_energy_to_k(photon_energy), fs_to_natural(t * 1e15),
    )

import numpy as np

from utils.constants import H_PLANCK, M_HE3
from utils.errors import DomainError


class TrapGeometry:
    """
    Class representing a single Gaussian tweezer

    ``depth_hz`` is the peak depth U0/h; the Rayleigh range and the trap
    frequencies follow from the waist, the wavelength and the mass.
    """
    def __init__(self, depth_hz, w0, wavelength, mass=M_HE3):
        if depth_hz <= 0 or w0 <= 0 or wavelength <= 0 or mass <= 0:
            raise DomainError("trap depth, waist, wavelength and mass must be positive",
                              depth_hz=depth_hz, w0=w0, wavelength=wavelength)
        self.depth_hz = float(depth_hz)
        self.w0 = float(w0)
        self.wavelength = float(wavelength)
        self.mass = float(mass)

    @property
    def depth_j(self):
        return self.depth_hz * H_PLANCK

    @property
    def z_r(self):
        return np.pi * self.w0**2 / self.wavelength

    @property
    def omega_r(self):
        return np.sqrt(4 * self.depth_j / (self.mass * self.w0**2))

    @property
    def omega_z(self):
        return np.sqrt(2 * self.depth_j / (self.mass * self.z_r**2))

    def omega(self, axis):
        """Angular trap frequency along 'r' or 'z'"""
        if axis == "r":
            return self.omega_r
        if axis == "z":
            return self.omega_z
        raise DomainError(f"unknown trap axis '{axis}'; use 'r' or 'z'")

    def with_depth(self, depth_hz):
        return TrapGeometry(depth_hz, self.w0, self.wavelength, self.mass)

    def to_dict(self):
        return {
            "depth_hz": self.depth_hz,
            "w0": self.w0,
            "wavelength": self.wavelength,
            "mass": self.mass,
            "z_r": self.z_r,
            "omega_r": self.omega_r,
            "omega_z": self.omega_z,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["depth_hz"], data["w0"], data["wavelength"], data.get("mass", M_HE3))


class DoubleWellSpec:
    """
    Class representing two identical tweezers separated along x

    The waist comes from the numerical aperture (w0 = 0.61 lambda/NA) unless
    given. ``depth_er`` is the peak depth of one tweezer in recoil units
    E_R = h^2/(2 m lambda^2); ``box`` holds the full box extents in units of
    (d, w0, z_R) and ``grid`` the interior point counts.
    """
    def __init__(self, wavelength=1013e-9, depth_er=6.0, separation=1.2e-6, w0=None, na=0.7,
                 mass=M_HE3, sign="red", grid=(161, 97, 97), box=(5.6, 4.2, 4.6)):
        if sign not in ("red", "blue"):
            raise DomainError(f"unknown tweezer sign '{sign}'; use 'red' or 'blue'")
        if w0 is None:
            if not na or na <= 0:
                raise DomainError("give either a waist or a positive numerical aperture")
            w0 = 0.61 * wavelength / na
        if depth_er <= 0 or separation < 0 or w0 <= 0:
            raise DomainError("depth and waist must be positive and separation non-negative",
                              depth_er=depth_er, separation=separation)
        if len(grid) != 3 or min(grid) < 3:
            raise DomainError("grid needs at least three points along each axis", grid=list(grid))
        self.wavelength = float(wavelength)
        self.depth_er = float(depth_er)
        self.separation = float(separation)
        self.w0 = float(w0)
        self.na = na
        self.mass = float(mass)
        self.sign = sign
        self.grid = tuple(int(n) for n in grid)
        self.box = tuple(float(b) for b in box)

    @property
    def k_w0(self):
        return 2 * np.pi * self.w0 / self.wavelength

    @property
    def z_r(self):
        return np.pi * self.w0**2 / self.wavelength

    @property
    def d_over_w0(self):
        return self.separation / self.w0

    @property
    def recoil_hz(self):
        return H_PLANCK / (2 * self.mass * self.wavelength**2)

    @property
    def depth_hz(self):
        return self.depth_er * self.recoil_hz

    def replace(self, **changes):
        """Copy with some fields changed; a new NA recomputes the waist"""
        values = {
            "wavelength": self.wavelength, "depth_er": self.depth_er, "separation": self.separation,
            "w0": self.w0, "na": self.na, "mass": self.mass, "sign": self.sign,
            "grid": self.grid, "box": self.box,
        }
        if "na" in changes and "w0" not in changes:
            values["w0"] = None
        values.update(changes)
        return DoubleWellSpec(**values)

    def to_dict(self):
        return {
            "wavelength": self.wavelength,
            "depth_er": self.depth_er,
            "separation": self.separation,
            "w0": self.w0,
            "na": self.na,
            "mass": self.mass,
            "sign": self.sign,
            "grid": list(self.grid),
            "box": list(self.box),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**{key: data[key] for key in
                      ("wavelength", "depth_er", "separation", "w0", "na", "mass", "sign", "grid", "box")
                      if key in data})

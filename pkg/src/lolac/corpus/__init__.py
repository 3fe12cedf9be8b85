"""Bundled example specifications."""

from importlib import resources

# the four specifications exercised by the differential acceptance suite
CORPUS = ("altitude", "network", "flight_phase", "flight_phase_nodiv")
ALL = CORPUS + ("altitude_adapted",)


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.lola").read_text(encoding="utf-8")


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.lola")


# Value ranges for random traces.  Network traffic needs addresses near the
# server constant for the branches to be exercised; the flight specs use
# large velocities so squaring wraps around.
_WIDE = (-50000, 50000)
RANGES = {
    "altitude": {"altitude": (0, 800)},
    "altitude_adapted": {"altitude": (0, 800)},
    "network": {"src": (213440, 213460), "dst": (213448, 213454), "length": (0, 1500)},
    "flight_phase": {
        "time_s": (0, 100000),
        "time_micros": (0, 999999),
        "velo_x": _WIDE,
        "velo_y": _WIDE,
        "velo_r_x": _WIDE,
        "velo_r_y": _WIDE,
    },
    "flight_phase_nodiv": {"vel_x": _WIDE, "vel_y": _WIDE, "vel_r_x": _WIDE, "vel_r_y": _WIDE},
}

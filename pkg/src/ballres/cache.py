"""On-disk cache of resonance sets.

Each entry is a JSON file holding its key, the resonances as
``[re, im, multiplicity, l]`` rows, and a SHA-256 checksum of the canonical
serialization of key and rows.  Files are written to a temporary name and
renamed into place.
"""

import hashlib
import json
import os
import tempfile
from pathlib import Path

from . import __version__
from .radial import BoundaryCondition, Resonance, ResonanceSet, ball_resonances

ALGORITHM = "aberth-ball-arith-1"
CACHE_VERSION = f"{__version__}+{ALGORITHM}"
ENV_VAR = "BALLRES_CACHE_DIR"


def default_cache_dir():
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "ballres"


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def resonance_payload(rset):
    """Key and rows of a resonance set as plain JSON data."""
    key = {"d": rset.dimension, "rho": rset.radius, "bc": rset.bc.value,
           "l_max": rset.l_max, "version": CACHE_VERSION}
    rows = [[e.value.real, e.value.imag, e.multiplicity, e.mode] for e in rset.entries]
    return key, rows


def resonances_to_json(rset):
    """Public listing of a resonance set (deterministic, full precision)."""
    data = {
        "d": rset.dimension, "rho": rset.radius, "bc": rset.bc.value, "l_max": rset.l_max,
        "total_multiplicity": rset.total_multiplicity,
        "resonances": [{"re": e.value.real, "im": e.value.imag,
                        "multiplicity": e.multiplicity, "l": e.mode} for e in rset.entries],
    }
    return json.dumps(data, indent=1, sort_keys=True) + "\n"


class ResonanceCache:
    def __init__(self, root=None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def path(self, d, rho, l_max, bc):
        bc = BoundaryCondition.parse(bc)
        tag = hashlib.sha256(canonical_json(
            {"d": d, "rho": float(rho), "bc": bc.value, "l_max": l_max,
             "version": CACHE_VERSION}).encode()).hexdigest()[:16]
        return self.root / f"res-d{d}-{bc.value}-l{l_max}-{tag}.json"

    def load(self, d, rho, l_max, bc):
        """Cached set, or None if absent, stale or corrupted."""
        bc = BoundaryCondition.parse(bc)
        p = self.path(d, rho, l_max, bc)
        try:
            data = json.loads(p.read_text())
            key, rows = data["key"], data["rows"]
            digest = hashlib.sha256(canonical_json([key, rows]).encode()).hexdigest()
        except (OSError, ValueError, KeyError, TypeError):
            return None
        want = {"d": d, "rho": float(rho), "bc": bc.value, "l_max": l_max,
                "version": CACHE_VERSION}
        if digest != data.get("checksum") or key != want:
            return None
        entries = tuple(Resonance(complex(re, im), int(m), int(l)) for re, im, m, l in rows)
        return ResonanceSet(d, float(rho), bc, l_max, entries)

    def store(self, rset):
        key, rows = resonance_payload(rset)
        digest = hashlib.sha256(canonical_json([key, rows]).encode()).hexdigest()
        text = canonical_json({"checksum": digest, "key": key, "rows": rows})
        p = self.path(rset.dimension, rset.radius, rset.l_max, rset.bc)
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, p)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return p

    def get(self, d, rho, l_max, bc="neumann"):
        """Load from cache, computing and storing on a miss."""
        rset = self.load(d, rho, l_max, bc)
        if rset is None:
            rset = ball_resonances(d, rho, l_max, bc)
            self.store(rset)
        return rset

    def calibration_path(self, d):
        return self.root / f"calibration-d{d}.json"

"""Fork-join benchmark programs with sequential oracles."""
from . import cg_lite, cilksort, heat, lu, scan, strassen
from .base import BenchInstance, BenchmarkSpec, Hints, checksum

BUILDERS = {
    "cilksort": cilksort.build,
    "heat": heat.build,
    "strassen": strassen.build,
    "lu": lu.build,
    "scan": scan.build,
    "cg_lite": cg_lite.build,
}

# desk-scale defaults: (n, base_case, extra parameters)
DEFAULTS = {
    "cilksort": (1 << 16, 1024, ()),
    "heat": (512, 16, (("steps", 4),)),
    "strassen": (256, 32, ()),
    "lu": (256, 16, ()),
    "scan": (1 << 16, 1024, ()),
    "cg_lite": (1 << 14, 256, (("iterations", 8),)),
}


def default_spec(name: str, **overrides) -> BenchmarkSpec:
    if name not in BUILDERS:
        raise ValueError(f"unknown benchmark {name!r}; choose from {sorted(BUILDERS)}")
    n, base, params = DEFAULTS[name]
    fields = {"name": name, "n": n, "base_case": base, "params": params}
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return BenchmarkSpec(**fields)


def build(spec: BenchmarkSpec, places: int) -> BenchInstance:
    """Build a fresh instance of ``spec`` for a machine with ``places`` active sockets."""
    if spec.name not in BUILDERS:
        raise ValueError(f"unknown benchmark {spec.name!r}")
    return BUILDERS[spec.name](spec, places)


__all__ = ["BUILDERS", "DEFAULTS", "BenchInstance", "BenchmarkSpec", "Hints", "build",
           "checksum", "default_spec"]

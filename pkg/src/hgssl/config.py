"""Benchmark config files: a small key/value format with line-precise errors.

Layout: full-line comments start with ``#`` or ``;``, ``[section]`` headers
group ``key = value`` pairs, and a ``schema_version = 1`` assignment must
appear before the first section.  The full schema (sections, keys, types,
defaults) is documented in the README; unknown sections or keys are rejected
with the offending line number.
"""

from dataclasses import fields, replace

from .bench import DEFAULT_PCA_DIMS, METHODS, ExperimentConfig, SyntheticSpec
from .errors import ConfigError
from .network import TrainConfig

_DATASET_PATH_KEYS = {
    "mnist": ("train_images", "train_labels", "test_images", "test_labels"),
    "fashion": ("train_images", "train_labels", "test_images", "test_labels"),
    "usps": ("train_path", "test_path"),
    "synthetic": (),
}

_SYNTHETIC_KEYS = ("n", "classes", "dim", "spread", "seed")


def parse_config_text(text, path="<config>"):
    """Parse the raw document into {section: {key: (value, line)}}.

    Keys before the first section header land in section ``""``.  Syntax
    problems raise :class:`ConfigError` carrying the line number.
    """
    sections = {"": {}}
    section = ""
    header_lines = {"": 0}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError("malformed section header", path, lineno)
            section = line[1:-1].strip()
            if section in sections:
                raise ConfigError(f"duplicate section [{section}]", path, lineno)
            sections[section] = {}
            header_lines[section] = lineno
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", path, lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError("empty key", path, lineno)
        if key in sections[section]:
            raise ConfigError(f"duplicate key {key!r}", path, lineno)
        sections[section][key] = (value, lineno)
    return sections, header_lines


class _SectionReader:
    """Typed access to one parsed section, tracking consumed keys."""

    def __init__(self, path, name, entries):
        self.path = path
        self.name = name
        self.entries = entries
        self.seen = set()

    def _raw(self, key):
        self.seen.add(key)
        return self.entries.get(key)

    def error(self, key, message):
        entry = self.entries.get(key)
        line = entry[1] if entry else None
        raise ConfigError(message, self.path, line)

    def string(self, key, default=None, choices=None):
        entry = self._raw(key)
        if entry is None:
            return default
        value = entry[0]
        if choices is not None and value not in choices:
            self.error(key, f"{key!r} must be one of {', '.join(choices)}, got {value!r}")
        return value

    def integer(self, key, default=None):
        entry = self._raw(key)
        if entry is None:
            return default
        try:
            return int(entry[0])
        except ValueError:
            self.error(key, f"expected an integer for {key!r}, got {entry[0]!r}")

    def real(self, key, default=None):
        entry = self._raw(key)
        if entry is None:
            return default
        try:
            return float(entry[0])
        except ValueError:
            self.error(key, f"expected a number for {key!r}, got {entry[0]!r}")

    def boolean(self, key, default=None):
        entry = self._raw(key)
        if entry is None:
            return default
        value = entry[0].lower()
        if value in ("true", "yes", "1"):
            return True
        if value in ("false", "no", "0"):
            return False
        self.error(key, f"expected true/false for {key!r}, got {entry[0]!r}")

    def int_or_none(self, key, default=None):
        entry = self._raw(key)
        if entry is None:
            return default
        if entry[0].lower() == "none":
            return None
        return self.integer(key)

    def real_list(self, key, default=None):
        entry = self._raw(key)
        if entry is None:
            return default
        try:
            return tuple(float(part) for part in entry[0].split(","))
        except ValueError:
            self.error(key, f"expected comma-separated numbers for {key!r}, got {entry[0]!r}")

    def int_list(self, key, default=None):
        entry = self._raw(key)
        if entry is None:
            return default
        try:
            return tuple(int(part) for part in entry[0].split(","))
        except ValueError:
            self.error(key, f"expected comma-separated integers for {key!r}, got {entry[0]!r}")

    def string_list(self, key, default=None):
        entry = self._raw(key)
        if entry is None:
            return default
        return tuple(part.strip() for part in entry[0].split(","))

    def reject_unknown(self):
        for key, (_, lineno) in self.entries.items():
            if key not in self.seen:
                where = f"[{self.name}]" if self.name else "the document root"
                raise ConfigError(f"unknown key {key!r} in {where}", self.path, lineno)


def load_config(path) -> ExperimentConfig:
    """Read and validate a benchmark config file into an ExperimentConfig."""
    with open(path, "r") as fh:
        text = fh.read()
    return parse_config(text, path=str(path))


def parse_config(text, path="<config>") -> ExperimentConfig:
    sections, header_lines = parse_config_text(text, path)
    known = {"", "dataset", "experiment", "train", "solver"}
    for name in sections:
        if name not in known:
            raise ConfigError(f"unknown section [{name}]", path, header_lines[name])

    root = _SectionReader(path, "", sections.get("", {}))
    version = root.integer("schema_version")
    if version is None:
        raise ConfigError("missing required 'schema_version = 1' before any section", path, None)
    if version != 1:
        root.error("schema_version", f"unsupported schema_version {version}")
    root.reject_unknown()

    if "dataset" not in sections:
        raise ConfigError("missing required [dataset] section", path, None)
    ds = _SectionReader(path, "dataset", sections["dataset"])
    name = ds.string("name", choices=tuple(_DATASET_PATH_KEYS))
    if name is None:
        raise ConfigError("missing 'name' in [dataset]", path, header_lines["dataset"])
    paths = {}
    for key in _DATASET_PATH_KEYS[name]:
        value = ds.string(key)
        if value is not None:
            paths[key] = value
    synthetic = None
    if name == "synthetic":
        synthetic = SyntheticSpec(
            n=ds.integer("n", SyntheticSpec.n),
            classes=ds.integer("classes", SyntheticSpec.classes),
            dim=ds.integer("dim", SyntheticSpec.dim),
            spread=ds.real("spread", SyntheticSpec.spread),
            seed=ds.integer("seed", SyntheticSpec.seed),
        )
    subsample_size = ds.int_or_none("subsample_size")
    subsample_seed = ds.integer("subsample_seed", 0)
    ds.reject_unknown()

    ex = _SectionReader(path, "experiment", sections.get("experiment", {}))
    methods = ex.string_list("methods", METHODS)
    for method in methods:
        if method not in METHODS:
            ex.error("methods", f"unknown method {method!r}; known: {', '.join(METHODS)}")
    noise_levels = ex.real_list("noise_levels", (0.0, 0.15, 0.30, 0.45))
    for level in noise_levels:
        if not (0.0 <= level < 1.0):
            ex.error("noise_levels", f"noise level {level} outside [0, 1)")
    seeds = ex.int_list("seeds", (0, 1, 2))
    if not methods or not seeds:
        raise ConfigError("need at least one method and one seed", path,
                          header_lines.get("experiment"))
    pca_dims = ex.int_or_none("pca_dims", DEFAULT_PCA_DIMS[name])
    k = ex.integer("k", 5)
    alpha = ex.real("alpha", 0.99)
    normalization = ex.string("normalization", "sym", choices=("sym", "rw"))
    include_centroid = ex.boolean("include_centroid", True)
    ex.reject_unknown()

    tr = _SectionReader(path, "train", sections.get("train", {}))
    defaults = TrainConfig()
    kwargs = {}
    for field in fields(TrainConfig):
        reader = tr.real if isinstance(getattr(defaults, field.name), float) else tr.integer
        kwargs[field.name] = reader(field.name, getattr(defaults, field.name))
    tr.reject_unknown()
    try:
        train = TrainConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), path, header_lines.get("train")) from exc

    so = _SectionReader(path, "solver", sections.get("solver", {}))
    solver_tol = so.real("tol", 1e-6)
    solver_max_iter = so.integer("max_iter", 1000)
    so.reject_unknown()

    try:
        return ExperimentConfig(
            dataset=name,
            paths=paths,
            methods=methods,
            noise_levels=noise_levels,
            seeds=seeds,
            pca_dims=pca_dims,
            k=k,
            alpha=alpha,
            normalization=normalization,
            include_centroid=include_centroid,
            train=train,
            solver_tol=solver_tol,
            solver_max_iter=solver_max_iter,
            subsample_size=subsample_size,
            subsample_seed=subsample_seed,
            synthetic=synthetic,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), path, None) from exc


def strip_subsample(cfg: ExperimentConfig) -> ExperimentConfig:
    """Full-scale profile: ignore any configured subsampling."""
    return replace(cfg, subsample_size=None)

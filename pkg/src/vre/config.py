"""Pipeline configuration: a two-level YAML mapping parsed into typed specs.

Accepted grammar (documented contract, see also README):

    globals:                      # optional, all keys optional
      batch_size: 10              # int >= 1, default 1
      output_size: [H, W]         # optional; default: native video size
      export:
        layout: binary_only       # or binary_and_image
        compression: false
    representations:              # required mapping, may be empty
      <name>:
        type: color/hsv           # registered kind id, required
        deps: [other_name, ...]   # optional, default []
        params: {...}             # opaque to the parser, validated by the kind
        batch_size: 5             # optional per-repr override (also accepted
                                  # inside params for compatibility)
        export: {layout: ..., compression: ...}   # optional partial override

Unknown keys at the top level, inside ``globals`` or at representation level
are errors; keys inside ``params`` pass through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError

LAYOUTS = ("binary_only", "binary_and_image")


@dataclass(frozen=True)
class ExportSettings:
    layout: str = "binary_only"
    compression: bool = False

    def __post_init__(self):
        if self.layout not in LAYOUTS:
            raise ConfigError(f"unknown export layout {self.layout!r}, expected one of {LAYOUTS}")
        if not isinstance(self.compression, bool):
            raise ConfigError(f"export compression must be a boolean, got {self.compression!r}")

    @property
    def binary(self) -> bool:
        return True  # every current layout stores the binary form

    @property
    def image(self) -> bool:
        return self.layout == "binary_and_image"


@dataclass(frozen=True)
class GlobalConfig:
    batch_size: int = 1
    export: ExportSettings = field(default_factory=ExportSettings)
    output_size: tuple[int, int] | None = None  # (height, width)

    def __post_init__(self):
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ConfigError(f"globals.batch_size must be a positive integer, got {self.batch_size!r}")
        if self.output_size is not None:
            h, w = self.output_size
            if not (isinstance(h, int) and isinstance(w, int) and h >= 1 and w >= 1):
                raise ConfigError(f"globals.output_size must be two integers >= 1, got {self.output_size!r}")


@dataclass(frozen=True)
class RepresentationSpec:
    """One node of the pipeline: a named, parameterized representation."""

    name: str
    kind: str
    deps: tuple[str, ...] = ()
    params: dict[str, Any] = field(default_factory=dict)
    batch_size_override: int | None = None
    export: ExportSettings | None = None  # None: inherit globals

    def __post_init__(self):
        if self.batch_size_override is not None and (
            not isinstance(self.batch_size_override, int) or self.batch_size_override < 1
        ):
            raise ConfigError(
                f"representation {self.name!r}: batch_size must be a positive integer, "
                f"got {self.batch_size_override!r}"
            )

    def effective_batch_size(self, global_cfg: GlobalConfig) -> int:
        return self.batch_size_override if self.batch_size_override is not None else global_cfg.batch_size

    def effective_export(self, global_cfg: GlobalConfig) -> ExportSettings:
        return self.export if self.export is not None else global_cfg.export


class _StrictLoader(yaml.SafeLoader):
    """SafeLoader that rejects duplicate mapping keys (stock YAML keeps the last)."""


def _construct_mapping(loader, node, deep=False):
    seen = {}
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in seen:
            mark = key_node.start_mark
            raise ConfigError(f"duplicate name {key!r}", mark.line + 1, mark.column + 1)
        seen[key] = True
    return yaml.SafeLoader.construct_mapping(loader, node, deep)


_StrictLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _require_mapping(value, what: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{what} must be a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(mapping: dict, allowed: set[str], what: str):
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {what}; allowed: {sorted(allowed)}")


def _parse_export(raw, what: str, base: ExportSettings | None = None) -> ExportSettings:
    raw = _require_mapping(raw, what)
    _reject_unknown(raw, {"layout", "compression"}, what)
    defaults = base or ExportSettings()
    return ExportSettings(
        layout=raw.get("layout", defaults.layout),
        compression=raw.get("compression", defaults.compression),
    )


def _parse_globals(raw) -> GlobalConfig:
    raw = _require_mapping(raw, "globals")
    _reject_unknown(raw, {"batch_size", "export", "output_size"}, "globals")
    output_size = raw.get("output_size")
    if output_size is not None:
        if not isinstance(output_size, (list, tuple)) or len(output_size) != 2:
            raise ConfigError(f"globals.output_size must be [height, width], got {output_size!r}")
        output_size = (output_size[0], output_size[1])
    return GlobalConfig(
        batch_size=raw.get("batch_size", 1),
        export=_parse_export(raw.get("export"), "globals.export"),
        output_size=output_size,
    )


def _parse_representation(name, raw, known_kinds: set[str]) -> RepresentationSpec:
    if not isinstance(name, str) or not name:
        raise ConfigError(f"representation name must be a non-empty string, got {name!r}")
    raw = _require_mapping(raw, f"representation {name!r}")
    _reject_unknown(raw, {"type", "deps", "params", "batch_size", "export"}, f"representation {name!r}")
    if "type" not in raw:
        raise ConfigError(f"representation {name!r} is missing required key 'type'")
    kind = raw["type"]
    if kind not in known_kinds:
        raise ConfigError(f"representation {name!r}: unknown kind {kind!r}; registered: {sorted(known_kinds)}")
    deps = raw.get("deps", [])
    if not isinstance(deps, list) or not all(isinstance(d, str) for d in deps):
        raise ConfigError(f"representation {name!r}: deps must be a list of names, got {deps!r}")
    params = dict(_require_mapping(raw.get("params"), f"representation {name!r} params"))
    batch_size = raw.get("batch_size", params.pop("batch_size", None))
    export = None
    if "export" in raw:
        export = _parse_export(raw["export"], f"representation {name!r} export")
    return RepresentationSpec(
        name=name,
        kind=kind,
        deps=tuple(deps),
        params=params,
        batch_size_override=batch_size,
        export=export,
    )


def parse_config(document: str, known_kinds: set[str] | None = None) -> tuple[GlobalConfig, list[RepresentationSpec]]:
    """Parse a configuration document into (globals, representation specs).

    Pure: the result depends only on ``document`` (and the registered kind
    set). Raises ConfigError with a 1-based position for syntax errors.
    """
    if known_kinds is None:
        from .representation import known_kinds as registry_kinds

        known_kinds = registry_kinds()
    try:
        root = yaml.load(document, Loader=_StrictLoader)
    except ConfigError:
        raise
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ConfigError(
            f"configuration syntax error: {exc.problem}",
            None if mark is None else mark.line + 1,
            None if mark is None else mark.column + 1,
        ) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"configuration syntax error: {exc}") from exc

    root = _require_mapping(root, "configuration document")
    _reject_unknown(root, {"globals", "representations"}, "configuration document")
    if "representations" not in root:
        raise ConfigError("configuration document is missing the 'representations' mapping")

    global_cfg = _parse_globals(root.get("globals"))
    reps_raw = _require_mapping(root["representations"], "representations")

    specs = [_parse_representation(name, raw, known_kinds) for name, raw in reps_raw.items()]
    names = {spec.name for spec in specs}
    for spec in specs:
        for dep in spec.deps:
            if dep not in names:
                raise ConfigError(f"representation {spec.name!r} depends on {dep!r}, which is not defined")
    return global_cfg, specs


def parse_config_file(path: str | Path, known_kinds: set[str] | None = None):
    return parse_config(Path(path).read_text(), known_kinds=known_kinds)


def serialize_config(global_cfg: GlobalConfig, specs: list[RepresentationSpec]) -> str:
    """Inverse of parse_config: parse(serialize(g, specs)) == (g, specs)."""
    doc: dict[str, Any] = {
        "globals": {
            "batch_size": global_cfg.batch_size,
            "export": {
                "layout": global_cfg.export.layout,
                "compression": global_cfg.export.compression,
            },
        },
        "representations": {},
    }
    if global_cfg.output_size is not None:
        doc["globals"]["output_size"] = list(global_cfg.output_size)
    for spec in specs:
        entry: dict[str, Any] = {"type": spec.kind, "deps": list(spec.deps), "params": dict(spec.params)}
        if spec.batch_size_override is not None:
            entry["batch_size"] = spec.batch_size_override
        if spec.export is not None:
            entry["export"] = {"layout": spec.export.layout, "compression": spec.export.compression}
        doc["representations"][spec.name] = entry
    return yaml.safe_dump(doc, sort_keys=False)


def with_overrides(
    global_cfg: GlobalConfig,
    batch_size: int | None = None,
    compression: bool | None = None,
    export_images: bool | None = None,
) -> GlobalConfig:
    """Apply CLI-level overrides on top of the parsed globals."""
    if batch_size is not None:
        if batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
        global_cfg = replace(global_cfg, batch_size=batch_size)
    export = global_cfg.export
    if compression is not None:
        export = ExportSettings(layout=export.layout, compression=compression)
    if export_images is not None:
        layout = "binary_and_image" if export_images else "binary_only"
        export = ExportSettings(layout=layout, compression=export.compression)
    return replace(global_cfg, export=export)

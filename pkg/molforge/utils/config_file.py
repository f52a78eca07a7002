"""
Flat ``key = value`` config files and their merge with command line flags
"""
import configparser
import dataclasses
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Type, TypeVar, Union, get_args, get_origin, get_type_hints

from molforge.data import PathLike
from molforge.errors import ConfigError

SECTION = "molforge"

T = TypeVar("T")


def read_config_file(path: Optional[PathLike]) -> Dict[str, str]:
    """
    Raw values of a config file.

    The ``[molforge]`` header is optional, a file without any header is read as one section.

    >>> import tempfile, os
    >>> with tempfile.TemporaryDirectory() as tmp:
    ...     path = os.path.join(tmp, "run.ini")
    ...     _ = Path(path).write_text("seed = 7\\nscaffold = c1ccncc1 # pyridine\\n")
    ...     read_config_file(path)
    {'seed': '7', 'scaffold': 'c1ccncc1'}

    :param path: config file, ``None`` gives no values
    """
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    text = path.read_text(encoding="utf-8")
    if not text.lstrip().startswith("["):
        text = f"[{SECTION}]\n{text}"
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    unknown = [name for name in parser.sections() if name != SECTION]
    if unknown:
        raise ConfigError(f"config file {path} has unknown sections {unknown}, only [{SECTION}] is read")
    if not parser.has_section(SECTION):
        return {}
    return {key.replace("-", "_"): value for key, value in parser.items(SECTION)}


def _coerce(value: Any, hint: Any) -> Any:
    """Convert a config string to the annotated type, other values pass through"""
    if not isinstance(value, str):
        return value
    origin = get_origin(hint)
    if origin is Union:
        args = [arg for arg in get_args(hint) if arg is not type(None)]
        if value.strip().lower() in ("", "none"):
            return None
        return _coerce(value, args[0])
    if origin in (tuple, list):
        item_type = get_args(hint)[0] if get_args(hint) else str
        items = [item.strip() for item in value.split(",") if item.strip()]
        return tuple(_coerce(item, item_type) for item in items)
    if hint is bool:
        state = configparser.ConfigParser.BOOLEAN_STATES.get(value.strip().lower())
        if state is None:
            raise ValueError(f"{value!r} is not a boolean")
        return state
    if hint in (int, float, str, Path):
        return hint(value.strip())
    parse = getattr(hint, "parse", None)
    if parse is not None:
        return parse(value.strip())
    return value


def field_names(cls: Type) -> Tuple[str, ...]:
    return tuple(item.name for item in dataclasses.fields(cls))


def build_config(cls: Type[T], *layers: Mapping[str, Any], **fixed: Any) -> T:
    """
    Dataclass instance from value layers, later layers win.

    ``None`` values in a layer leave the earlier value in place, so unset command line
    flags do not hide config file entries. Keys the dataclass does not define are ignored.

    :param cls: config dataclass
    :param layers: mappings from field name to a value or its text form
    :param fixed: values that always apply, such as nested configs
    """
    hints = get_type_hints(cls)
    names = set(field_names(cls))
    values: Dict[str, Any] = {}
    for layer in layers:
        for key, value in layer.items():
            if key in names and value is not None:
                try:
                    values[key] = _coerce(value, hints[key])
                except ValueError as exc:
                    raise ConfigError(f"invalid value {value!r} for {key}: {exc}") from exc
    values.update(fixed)
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(f"incomplete {cls.__name__}: {exc}") from exc


def unknown_keys(values: Mapping[str, Any], *classes: Type) -> Tuple[str, ...]:
    """Keys that no listed dataclass defines"""
    known = set()
    for cls in classes:
        known.update(field_names(cls))
    return tuple(sorted(key for key in values if key not in known))


def warn_unknown(values: Mapping[str, Any], *classes: Type, extra: Tuple[str, ...] = ()) -> None:
    unknown = [key for key in unknown_keys(values, *classes) if key not in extra]
    if unknown:
        logging.getLogger("molforge").warning("config keys %s are not used by this command", ", ".join(unknown))

#
# This file is part of Python package: `secbw`
#
#     https://github.com/rmvanhees/secbw.git
#
# Copyright (c) 2026 - R.M. van Hees (SRON)
#    All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Read the layout of dataset and checkpoint files from YAML."""

from __future__ import annotations

__all__ = ["Template", "adjust_attr", "load_yaml", "package_yaml"]

import pprint
from importlib.resources import files
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import yaml
import yaml_include

if TYPE_CHECKING:
    from importlib.resources.abc import Traversable


# - local function -------------------------------------
def load_yaml(file_path: Path | str | Traversable) -> dict:
    """Read a YAML file, resolving `!inc` relative to the file.

    Parameters
    ----------
    file_path :  Path | str
       full path of YAML file

    Returns
    -------
    dict
       contents of the YAML file

    """
    file_path = Path(str(file_path))
    if not file_path.is_file():
        raise FileNotFoundError(f"{file_path} not found")

    # Register the !inc tag
    yaml.add_constructor(
        "!inc", yaml_include.Constructor(base_dir=file_path.parent), yaml.SafeLoader
    )

    with file_path.open("r", encoding="ascii") as fid:
        try:
            settings = yaml.safe_load(fid)
        except yaml.YAMLError as exc:
            raise RuntimeError(f"Failed to parse {file_path}") from exc

    return {} if settings is None else settings


def package_yaml(name: str) -> Traversable:
    """Return path to a YAML file shipped in `secbw.Data`."""
    return files("secbw.Data") / (name if name.endswith(".yaml") else f"{name}.yaml")


def adjust_attr(dtype: str, attr_key: str, attr_val: object) -> object:
    """Return attribute converted to the same data type as its variable.

    Parameters
    ----------
    dtype :  str
      numpy data-type of variable
    attr_key :  str
      name of the attribute
    attr_val :  object
      original value of the attribute

    """
    if attr_key in ("valid_min", "valid_max", "flag_values"):
        return np.asarray(attr_val, dtype=dtype)[()]

    return attr_val


# - class definition -----------------------------------
class Template:
    """Layout of a file: groups, dimensions, variables and global attributes.

    Parameters
    ----------
    layout_yaml :  list[Path | str] | Path | str | None
       YAML file(s) with the layout, merged in the given order
    layout :  dict[str, dict] | None
       layout as Python dictionary, used when no YAML file is given

    """

    def __init__(
        self: Template,
        layout_yaml: list[Path | str] | Path | str | None,
        layout: dict[str, dict] | None = None,
    ) -> None:
        """Construct a Template instance."""
        self.groups: set[str] = set()
        self.dimensions: dict[str, dict] = {}
        self.variables: dict[str, dict] = {}
        self.attrs_global: dict[str, object] = {}
        if layout_yaml is not None:
            for yaml_file in (
                layout_yaml if isinstance(layout_yaml, list) else [layout_yaml]
            ):
                try:
                    self.merge(load_yaml(yaml_file))
                except (FileNotFoundError, RuntimeError) as exc:
                    raise RuntimeError(
                        f"Fails to access YAML file: {yaml_file}"
                    ) from exc
        elif layout is not None:
            self.merge(layout)

    def __repr__(self: Template) -> str:
        """Show layout as dictionary."""
        return pprint.pformat(self.asdict)

    def merge(self: Template, layout: dict) -> None:
        """Add the elements of a layout, later definitions win."""
        self.groups |= set(layout.get("groups") or ())
        self.dimensions |= {
            key: dict(val) for key, val in (layout.get("dimensions") or {}).items()
        }
        self.variables |= layout.get("variables") or {}
        self.attrs_global |= layout.get("attrs_global") or {}

    @property
    def asdict(self: Template) -> dict:
        """Return the layout as dictionary."""
        return {
            "groups": self.groups,
            "dimensions": self.dimensions,
            "variables": self.variables,
            "attrs_global": self.attrs_global,
        }

    def set_dims(self: Template, dict_dims: dict[str, int]) -> None:
        """Set the size of dimensions which are undefined (-1) in the layout."""
        for key, value in dict_dims.items():
            if self.dimensions[key]["_size"] < 0:
                self.dimensions[key]["_size"] = int(value)

    def unset_dims(self: Template) -> list[str]:
        """Return names of the dimensions without size."""
        return [key for key, val in self.dimensions.items() if val["_size"] < 0]

    def drop_group(self: Template, group: str) -> None:
        """Remove a group with all its variables from the layout."""
        self.groups.discard(group)
        self.variables = {
            key: val
            for key, val in self.variables.items()
            if not key.startswith(f"/{group}/")
        }

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
"""Write the checkpoint layout as netCDF4 file, using `netCDF4`."""

from __future__ import annotations

__all__ = ["TemplateNc"]

import logging
from pathlib import Path, PurePosixPath

# pylint: disable=no-name-in-module
from netCDF4 import Dataset

from . import sw_version
from .template import Template, adjust_attr


# - class definition -----------------------------------
class TemplateNc(Template):
    """netCDF4 file from a layout, for checkpoints of the vertex network.

    Parameters
    ----------
    layout_yaml :  list[Path | str] | Path | str | None, default=None
       YAML file(s) with the layout
    layout :  dict[str, dict] | None, default=None
       layout as Python dictionary

    Notes
    -----
    Dimensions are defined in the root group, variables may live in groups.

    """

    def __init__(
        self: TemplateNc,
        layout_yaml: list[Path | str] | Path | str | None = None,
        *,
        layout: dict | None = None,
    ) -> None:
        """Construct a TemplateNc instance."""
        self.logger = logging.getLogger("secbw.TemplateNc")
        super().__init__(layout_yaml, layout)

    def _fill(self: TemplateNc, fid: Dataset) -> None:
        """Add dimensions, variables and fixed global attributes."""
        if unset := self.unset_dims():
            raise ValueError(f"size of dimension {unset[0]} is not set")

        for group in sorted(self.groups):
            fid.createGroup(group)
        for name, dim in self.dimensions.items():
            fid.createDimension(name, dim["_size"])

        for name, var in self.variables.items():
            path = PurePosixPath(name)
            if missing := [x for x in var["_dims"] if x not in fid.dimensions]:
                raise ValueError(f"Dimension '{missing[0]}' not found in file")
            parent = fid if str(path.parent) in (".", "/") else fid[str(path.parent)]
            ncvar = parent.createVariable(
                path.name, var["_dtype"], dimensions=tuple(var["_dims"])
            )
            ncvar.setncatts(
                {
                    key: adjust_attr(var["_dtype"], key, val)
                    for key, val in var.items()
                    if not key.startswith("_")
                }
            )

        fid.setncattr("_creator", f"secbw.TemplateNc,version={sw_version()}")
        for key, val in self.attrs_global.items():
            if val != "TBW":
                fid.setncattr(key, val)

    def diskless(self: TemplateNc) -> Dataset:
        """Return the empty file in memory, to be filled by the caller."""
        fid = Dataset("checkpoint.nc", "w", memory=4096)
        try:
            self._fill(fid)
        except ValueError:
            fid.close()
            raise
        return fid

    def to_disk(self: TemplateNc, fid: Dataset, filename: Path | str) -> None:
        """Close the in-memory file of `diskless` and write it to disk."""
        try:
            Path(filename).write_bytes(fid.close())
        except PermissionError as exc:
            raise RuntimeError(f"failed to create {filename}") from exc
        except OSError as exc:
            raise RuntimeError(f"failed to write {filename}") from exc
        self.logger.debug("written %s", filename)

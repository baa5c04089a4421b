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
"""Write the dataset layout as HDF5 file, using `h5py`.

Dimensions become HDF5 dimension scales in the root group, all variables
are attached to their scales. No modification times are stored, hence files
written twice with the same contents are identical.
"""

from __future__ import annotations

__all__ = ["TemplateH5"]

import logging
from typing import TYPE_CHECKING

import h5py
import numpy as np

from . import sw_version
from .template import Template, adjust_attr

if TYPE_CHECKING:
    from pathlib import Path

# - global parameters ---------------------------------
# attribute value of a dimension scale which is not a variable
NOT_A_VARIABLE = "This is a netCDF dimension but not a netCDF variable."


# - class definition -----------------------------------
class TemplateH5(Template):
    """HDF5 file from a layout, for datasets of channel samples.

    Parameters
    ----------
    layout_yaml :  list[Path | str] | Path | str | None, default=None
       YAML file(s) with the layout
    layout :  dict[str, dict] | None, default=None
       layout as Python dictionary

    """

    def __init__(
        self: TemplateH5,
        layout_yaml: list[Path | str] | Path | str | None = None,
        *,
        layout: dict | None = None,
    ) -> None:
        """Construct a TemplateH5 instance."""
        self.logger = logging.getLogger("secbw.TemplateH5")
        super().__init__(layout_yaml, layout)

    def _add_scales(self: TemplateH5, fid: h5py.File) -> None:
        """Write every dimension as dimension scale with its indices."""
        if unset := self.unset_dims():
            raise ValueError(f"size of dimension {unset[0]} is not set")

        for name, dim in self.dimensions.items():
            dtype = dim.get("_dtype", "u4")
            scale = fid.create_dataset(
                name,
                data=np.arange(dim["_size"], dtype=dtype),
                track_times=False,
            )
            scale.make_scale(name if "long_name" in dim else NOT_A_VARIABLE)
            for key, val in dim.items():
                if not key.startswith("_"):
                    scale.attrs[key] = adjust_attr(dtype, key, val)

    def _add_variables(self: TemplateH5, fid: h5py.File) -> None:
        """Create the (empty) variables, attached to their dimension scales."""
        gcpl = h5py.h5p.create(h5py.h5p.GROUP_CREATE)
        gcpl.set_obj_track_times(False)
        for group in sorted(self.groups):
            h5py.h5g.create(fid.id, group.encode(), gcpl=gcpl)

        for name, var in self.variables.items():
            scales = [fid[dim] for dim in var["_dims"]]
            shape = tuple(x.size for x in scales)
            kwargs = {}
            if "_compression" in var and 0 not in shape:
                kwargs = {
                    "chunks": True,
                    "compression": "gzip",
                    "compression_opts": var["_compression"],
                    "shuffle": True,
                }
            dset = fid.create_dataset(
                name, shape=shape, dtype=var["_dtype"], track_times=False, **kwargs
            )
            for ii, scale in enumerate(scales):
                dset.dims[ii].attach_scale(scale)
            for key, val in var.items():
                if not key.startswith("_"):
                    dset.attrs[key] = adjust_attr(var["_dtype"], key, val)

    def _add_attrs(self: TemplateH5, fid: h5py.File) -> None:
        """Attach the fixed global attributes, "TBW" values are left out."""
        fid.attrs["_creator"] = f"secbw.TemplateH5,version={sw_version()}"
        for key, val in self.attrs_global.items():
            if val != "TBW":
                fid.attrs[key] = val

    def _fill(self: TemplateH5, fid: h5py.File) -> None:
        self._add_scales(fid)
        self._add_variables(fid)
        self._add_attrs(fid)

    def create(self: TemplateH5, filename: Path | str) -> h5py.File:
        """Create the file on disk (overwrite if exist) and return it opened.

        Parameters
        ----------
        filename :  Path | str
           name of the file on disk

        Returns
        -------
        h5py.File
           file with empty variables, to be filled and closed by the caller

        """
        if unset := self.unset_dims():
            raise ValueError(f"size of dimension {unset[0]} is not set")

        try:
            fid = _open_new(filename)
        except OSError as exc:
            raise RuntimeError(f"failed to create {filename}") from exc
        try:
            self._fill(fid)
        except Exception:
            fid.close()
            raise
        self.logger.debug("created %s", filename)
        return fid


# - helper functions -----------------------------------
def _open_new(filename: Path | str) -> h5py.File:
    """Create an empty HDF5 file without time stamps, truncate if exist."""
    fapl = h5py.h5p.create(h5py.h5p.FILE_ACCESS)
    fapl.set_libver_bounds(h5py.h5f.LIBVER_EARLIEST, h5py.h5f.LIBVER_LATEST)
    fcpl = h5py.h5p.create(h5py.h5p.FILE_CREATE)
    fcpl.set_obj_track_times(False)
    fid = h5py.h5f.create(
        str(filename).encode(), h5py.h5f.ACC_TRUNC, fapl=fapl, fcpl=fcpl
    )
    return h5py.File(fid)

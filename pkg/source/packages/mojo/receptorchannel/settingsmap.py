"""
.. module:: settingsmap
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Module that contains the :class:`SettingsMap` object which layers command
               line settings, a channel specification document and the package defaults
               into one map with path style lookups.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


from typing import Any, Iterable, List, Mapping, MutableMapping, Optional, Sequence, Union

import re
import reprlib

from mojo.receptorchannel.exceptions import SpecificationError


REGEX_PATH_VALIDATOR = re.compile("/{1}([-a-zA-Z0-9_]+)")


def validate_path_name(path: str) -> List[str]:
    """
        Validates a settings pathname.

        :param path: The path to validate and determine its parts.

        :returns: The seperate parts of the path provided.

        :raises: :class:`SpecificationError` when the path has no valid parts.
    """

    parts = REGEX_PATH_VALIDATOR.findall(path.rstrip("/"))
    if len(parts) == 0:
        raise SpecificationError("Invalid settings path", field=path)

    return parts


def _split_path(path: Union[str, Sequence[str]]) -> List[str]:
    if isinstance(path, (list, tuple)):
        parts = list(path)
    else:
        parts = validate_path_name(path)
    return parts


class SettingsMap(MutableMapping):
    """
        The :class:`SettingsMap` holds an ordered list of nested dictionaries, highest
        priority first.  Reading a key collects the candidates from every layer.  Nested
        dictionaries are merged into a child :class:`SettingsMap` so a value set in a
        higher layer shadows only that leaf.  Scalars and lists come from the highest
        layer that defines them.  A `None` value is treated as absent so that unset
        command line flags never shadow a specification document.

        Examples:
            settings = SettingsMap(flags, document, DEFAULT_SETTINGS)

            n = settings.lookup("/channel/n")
    """

    def __init__(self, *layers: Optional[MutableMapping]):
        self.layers: List[MutableMapping] = [lyr for lyr in layers if lyr is not None]
        return

    def copy(self) -> "SettingsMap":
        """
            New :class:`SettingsMap` with shallow copies of every layer.
        """
        cpy_layers = [lyr.copy() for lyr in self.layers]
        nmap = self.__class__(*cpy_layers)
        return nmap

    def exists(self, path: Union[str, Sequence[str]]) -> bool:
        """
            Checks to see if a value exists at the path specified.

            :param path: Path of the setting, for example '/channel/n'.

            :returns: A boolean indicating if the specified path contains a value
        """
        found = True

        try:
            self._lookup(_split_path(path))
        except LookupError:
            found = False

        return found

    def flatten(self) -> dict:
        """
            Flattens the layers into a plain nested dictionary of the effective values.
        """
        fd = {}

        for key in sorted(self.keys()):
            val = self[key]
            if isinstance(val, SettingsMap):
                val = val.flatten()
            fd[key] = val

        return fd

    def insert(self, path: Union[str, Sequence[str]], value: Any):
        """
            Insert a value at the path specified in the highest priority layer.

            :param path: Path where the value is to be inserted.
            :param value: The value to insert.
        """
        path_parts = _split_path(path)

        if len(self.layers) == 0:
            self.layers.append({})

        dref = self.layers[0]
        for part in path_parts[:-1]:
            if not isinstance(dref.get(part), MutableMapping):
                dref[part] = {}
            dref = dref[part]

        dref[path_parts[-1]] = value

        return

    def keys(self) -> Iterable[str]:
        """
            Gets the top level keys that have a value in at least one layer.
        """

        mks = set()

        for lyr in self.layers:
            mks.update(k for k, v in lyr.items() if v is not None)

        return mks

    def lookup(self, path: Union[str, Sequence[str]], default: Optional[Any] = None, raise_error: bool = True) -> Any:
        """
            Lookup a value at the path specified.

            :param path: Path where the desired value is located.
            :param default: Value returned when the path does not exist.  When a default
                            is provided a missing path never raises.
            :param raise_error: Raise a :class:`LookupError` for a missing path with no default.

            :returns: The value stored at the specified path.

            :raises: :class:`LookupError`
        """
        rtnval = default

        try:
            rtnval = self._lookup(_split_path(path))
        except LookupError:
            if raise_error and default is None:
                raise

        return rtnval

    def new_child(self, m: Optional[dict] = None, **kwargs) -> "SettingsMap":
        """
            New :class:`SettingsMap` with a new highest priority layer followed by all the
            previous layers.
        """
        if m is None:
            m = kwargs
        elif kwargs:
            m.update(kwargs)

        ncm = self.__class__(m, *self.layers)

        return ncm

    def _lookup(self, path_parts: List[str]) -> Any:

        found = self
        for idx, part in enumerate(path_parts):
            if isinstance(found, Mapping) and part in found:
                found = found[part]
            else:
                path = "/" + "/".join(path_parts[:idx + 1])
                raise LookupError(f"Settings lookup failure for path={path}")

        return found

    def _merge_candidates(self, candidates: List[Any]) -> Any:

        rtnval = candidates[0]

        if isinstance(rtnval, Mapping):
            mappings = [cand for cand in candidates if isinstance(cand, Mapping)]
            if len(mappings) > 1:
                rtnval = SettingsMap(*mappings)
            else:
                rtnval = SettingsMap(rtnval)

        return rtnval

    def __bool__(self):
        return len(self.keys()) > 0

    def __contains__(self, key: str) -> bool:
        haskey = False

        for lyr in self.layers:
            if lyr.get(key) is not None:
                haskey = True
                break

        return haskey

    __copy__ = copy

    def __delitem__(self, key: str):
        kfound = False

        for lyr in self.layers:
            if key in lyr:
                kfound = True
                del lyr[key]

        if not kfound:
            raise KeyError(key)

        return

    def __getitem__(self, key: str) -> Any:

        candidates = [lyr[key] for lyr in self.layers if lyr.get(key) is not None]

        if len(candidates) == 0:
            raise KeyError(key)

        rtnval = self._merge_candidates(candidates)

        return rtnval

    def __iter__(self):
        return iter(self.keys())

    def __len__(self):
        return len(self.keys())

    @reprlib.recursive_repr()
    def __repr__(self):
        rval = f'{self.__class__.__name__}({", ".join(map(repr, self.layers))})'
        return rval

    def __setitem__(self, key: str, value: Any):

        if len(self.layers) == 0:
            self.layers.append({})

        self.layers[0][key] = value

        return

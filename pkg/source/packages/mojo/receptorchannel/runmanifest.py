"""
.. module:: runmanifest
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Module that contains the :class:`RunManifest` emitted with every command
               line report.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


from typing import Any, Dict, List, Optional

import hashlib
import json

from dataclasses import dataclass, field
from importlib import metadata

DISTRIBUTION_NAME = "mojo-receptor-capacity"

UNKNOWN_VERSION = "0+unknown"


def tool_version() -> str:
    """
        The installed version of the distribution, or '0+unknown' when running from a
        source tree that was never installed.
    """
    try:
        version = metadata.version(DISTRIBUTION_NAME)
    except metadata.PackageNotFoundError:
        version = UNKNOWN_VERSION
    return version


def _flatten_paths(doc: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat = {}
    for key in sorted(doc):
        val = doc[key]
        path = f"{prefix}/{key}"
        if isinstance(val, dict):
            flat.update(_flatten_paths(val, path))
        else:
            flat[path] = val
    return flat


@dataclass
class RunManifest:
    """
        The :class:`RunManifest` records what produced a report: the command, the full
        effective parameter set, the tool version, the seeds and the wall clock duration.
        Its JSON document is accepted back as a specification document, so a manifest
        re-runs its command.
    """

    command: str
    parameters: Dict[str, Any]
    version: str = field(default_factory=tool_version)
    seeds: Dict[str, int] = field(default_factory=dict)
    duration: Optional[float] = None

    def digest(self) -> str:
        """
            A short hash of the command and parameters that names the configuration.
        """
        text = json.dumps({"command": self.command, "parameters": self.parameters}, sort_keys=True)
        rtnval = hashlib.sha1(text.encode("utf-8")).hexdigest()[:10]
        return rtnval

    def comment_lines(self) -> List[str]:
        """
            The manifest as '# key=value' lines for the top of a CSV file.  The duration
            is left out so that a re-run produces identical bytes.
        """
        lines = [
            f"# command={self.command}",
            f"# version={self.version}",
            f"# digest={self.digest()}",
        ]

        for name in sorted(self.seeds):
            lines.append(f"# seed/{name}={self.seeds[name]}")

        for path, val in _flatten_paths(self.parameters).items():
            lines.append(f"# {path}={json.dumps(val)}")

        return lines

    def to_document(self) -> dict:
        doc = {
            "command": self.command,
            "version": self.version,
            "digest": self.digest(),
            "seeds": dict(self.seeds),
            "parameters": self.parameters,
            "duration": self.duration,
        }
        return doc

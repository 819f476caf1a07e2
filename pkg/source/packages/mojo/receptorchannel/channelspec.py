"""
.. module:: channelspec
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Module that reads and writes channel specification documents and turns
               the effective settings into channels.

    A specification document is JSON with the optional sections 'channel', 'optimizer',
    'simulation', 'run', 'sweep' and 'output'.  The channel section is either

        {"kind": "independent", "n": 2, "alpha_L": 1.0, "alpha_H": 10.0, "beta": 20.0}

    with kind 'independent' or 'cooperative', or, for kind 'custom', explicit total rate
    vectors

        {"kind": "custom", "up_H": [20, 10], "up_L": [2, 1], "down": [20, 40]}

    where n is the vector length.  A run manifest written by the command line tool is
    also accepted, bare or nested under the 'manifest' key of a JSON report, and its
    'parameters' section is used as the document.  So is a CSV report whose leading
    '# /section/key=value' comment lines hold the parameters.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


from typing import Any, List

import json
import numbers

from mojo.receptorchannel.channelmodel import (
    BirthDeathChannel,
    ChannelKind,
    ReceptorKinetics,
    build_cooperative_channel,
    build_custom_channel,
    build_independent_channel
)
from mojo.receptorchannel.exceptions import SpecificationError
from mojo.receptorchannel.settingpaths import SettingPaths
from mojo.receptorchannel.settingsmap import SettingsMap, validate_path_name

KNOWN_SECTIONS = ("channel", "optimizer", "simulation", "run", "sweep", "output")

CHANNEL_FIELDS = ("n", "kind", "alpha_L", "alpha_H", "beta", "up_H", "up_L", "down")


def _parse_comment_manifest(text: str) -> dict:
    """
        Rebuilds the parameters of a CSV report from its '# /section/key=value' lines.
    """
    doc = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.startswith("#"):
            break
        entry = line[1:].strip()
        if not entry.startswith("/"):
            continue

        path, sep, raw = entry.partition("=")
        if sep == "":
            raise SpecificationError("Expected '# /section/key=value'", line=lineno)
        try:
            val = json.loads(raw)
        except json.JSONDecodeError as jerr:
            raise SpecificationError(f"Malformed manifest value: {jerr.msg}", field=path, line=lineno) from jerr

        parts = validate_path_name(path)
        dref = doc
        for part in parts[:-1]:
            dref = dref.setdefault(part, {})
        dref[parts[-1]] = val

    return doc


def parse_spec_document(text: str) -> dict:
    """
        Parses the text of a specification document, a JSON run manifest or the manifest
        comment block at the top of a CSV report.

        :param text: The document text.

        :returns: The document as nested dictionaries.

        :raises: :class:`SpecificationError` naming the line or field of the problem.
    """
    if text.startswith("#"):
        doc = _parse_comment_manifest(text)
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as jerr:
            raise SpecificationError(f"Malformed specification document: {jerr.msg}", line=jerr.lineno) from jerr

    if not isinstance(doc, dict):
        raise SpecificationError("A specification document must be a JSON object.", line=1)

    # a JSON report nests the run manifest beside its result
    if isinstance(doc.get("manifest"), dict) and "command" in doc["manifest"]:
        doc = doc["manifest"]

    if "parameters" in doc and "command" in doc:
        doc = doc["parameters"]
        if not isinstance(doc, dict):
            raise SpecificationError("The manifest parameters must be a JSON object.", field="/parameters")

    for section, content in doc.items():
        if section not in KNOWN_SECTIONS:
            raise SpecificationError(f"Unknown section '{section}'", field=f"/{section}")
        if not isinstance(content, dict):
            raise SpecificationError(f"The section '{section}' must be a JSON object.", field=f"/{section}")

    for name in doc.get("channel", {}):
        if name not in CHANNEL_FIELDS:
            raise SpecificationError(f"Unknown channel field '{name}'", field=f"/channel/{name}")

    return doc


def load_spec_document(path: str) -> dict:
    """
        Reads and parses a specification document from a file.
    """
    try:
        with open(path, "r") as sfile:
            text = sfile.read()
    except OSError as oserr:
        raise SpecificationError(f"Unable to read the specification document '{path}': {oserr.strerror}") from oserr

    doc = parse_spec_document(text)

    return doc


def dump_spec_document(doc: dict) -> str:
    """
        Renders a specification document as stable JSON text.
    """
    text = json.dumps(doc, indent=4, sort_keys=True)
    return text


def spec_document_for_channel(ch: BirthDeathChannel) -> dict:
    """
        The specification document that rebuilds a channel.
    """
    doc = {"channel": ch.to_document()}
    return doc


def _require(settings: SettingsMap, path: SettingPaths) -> Any:
    try:
        val = settings.lookup(path.value)
    except LookupError as luerr:
        raise SpecificationError("Missing channel setting", field=path.value) from luerr
    return val


def _number(settings: SettingsMap, path: SettingPaths) -> float:
    val = _require(settings, path)
    if isinstance(val, bool) or not isinstance(val, numbers.Real):
        raise SpecificationError(f"Expected a number, got {val!r}", field=path.value)
    return float(val)


def _integer(settings: SettingsMap, path: SettingPaths) -> int:
    val = _require(settings, path)
    if isinstance(val, bool) or not isinstance(val, numbers.Integral):
        raise SpecificationError(f"Expected an integer, got {val!r}", field=path.value)
    return int(val)


def _vector(settings: SettingsMap, path: SettingPaths) -> List[float]:
    val = _require(settings, path)
    if not isinstance(val, (list, tuple)) or not all(
            isinstance(v, numbers.Real) and not isinstance(v, bool) for v in val):
        raise SpecificationError(f"Expected a list of numbers, got {val!r}", field=path.value)
    return [float(v) for v in val]


def channel_kind_from_settings(settings: SettingsMap) -> ChannelKind:
    """
        The channel kind of the effective settings.
    """
    kind = _require(settings, SettingPaths.CHANNEL_KIND)
    try:
        rtnval = ChannelKind(kind)
    except ValueError as verr:
        choices = ", ".join(k.value for k in ChannelKind)
        raise SpecificationError(f"Unknown channel kind {kind!r}, expected one of {choices}",
                                 field=SettingPaths.CHANNEL_KIND.value) from verr
    return rtnval


def kinetics_from_settings(settings: SettingsMap) -> ReceptorKinetics:
    """
        The receptor kinetics of the effective settings.
    """
    kin = ReceptorKinetics(
        alpha_L=_number(settings, SettingPaths.CHANNEL_ALPHA_L),
        alpha_H=_number(settings, SettingPaths.CHANNEL_ALPHA_H),
        beta=_number(settings, SettingPaths.CHANNEL_BETA),
    )
    return kin


def channel_from_settings(settings: SettingsMap) -> BirthDeathChannel:
    """
        Builds the channel described by the effective settings.

        :raises: :class:`SpecificationError` for missing or mistyped fields and
                 :class:`ChannelValidationError` for rates that violate their invariants.
    """
    kind = channel_kind_from_settings(settings)

    if kind == ChannelKind.CUSTOM:
        up_H = _vector(settings, SettingPaths.CHANNEL_UP_H)
        up_L = _vector(settings, SettingPaths.CHANNEL_UP_L)
        down = _vector(settings, SettingPaths.CHANNEL_DOWN)
        if settings.exists(SettingPaths.CHANNEL_N.value):
            n = _integer(settings, SettingPaths.CHANNEL_N)
            if n != len(up_H):
                raise SpecificationError(f"n={n} does not match the {len(up_H)} custom rates",
                                         field=SettingPaths.CHANNEL_N.value)
        ch = build_custom_channel(up_H, up_L, down)
    else:
        n = _integer(settings, SettingPaths.CHANNEL_N)
        kin = kinetics_from_settings(settings)
        if kind == ChannelKind.INDEPENDENT:
            ch = build_independent_channel(n, kin)
        else:
            ch = build_cooperative_channel(n, kin)

    return ch

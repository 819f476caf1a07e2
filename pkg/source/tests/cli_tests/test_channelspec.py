
import unittest

from mojo.receptorchannel.channelmodel import (
    ChannelKind,
    ReceptorKinetics,
    build_cooperative_channel,
    build_custom_channel
)
from mojo.receptorchannel.channelspec import (
    channel_from_settings,
    dump_spec_document,
    parse_spec_document,
    spec_document_for_channel
)
from mojo.receptorchannel.exceptions import ChannelValidationError, SpecificationError
from mojo.receptorchannel.runmanifest import RunManifest
from mojo.receptorchannel.settingpaths import DEFAULT_SETTINGS
from mojo.receptorchannel.settingsmap import SettingsMap

class TestParseSpecDocument(unittest.TestCase):

    def test_plain_document(self):

        doc = parse_spec_document('{"channel": {"kind": "cooperative", "n": 3, "alpha_L": 1, "alpha_H": 4, "beta": 2}}')

        self.assertEqual(doc["channel"]["kind"], "cooperative")
        self.assertEqual(doc["channel"]["n"], 3)

        return

    def test_malformed_json_names_the_line(self):

        with self.assertRaises(SpecificationError) as ctx:
            parse_spec_document('{\n  "channel": {\n    "n": ,\n  }\n}')

        self.assertEqual(ctx.exception.line, 3)

        return

    def test_not_an_object(self):

        with self.assertRaises(SpecificationError):
            parse_spec_document("[1, 2, 3]")

        return

    def test_unknown_section_and_field(self):

        with self.assertRaises(SpecificationError) as ctx:
            parse_spec_document('{"channels": {}}')
        self.assertEqual(ctx.exception.field, "/channels")

        with self.assertRaises(SpecificationError) as ctx:
            parse_spec_document('{"channel": {"k_on": 1.0}}')
        self.assertEqual(ctx.exception.field, "/channel/k_on")

        with self.assertRaises(SpecificationError) as ctx:
            parse_spec_document('{"optimizer": 5}')
        self.assertEqual(ctx.exception.field, "/optimizer")

        return

    def test_run_manifest_document(self):

        manifest = RunManifest("capacity", {"channel": {"kind": "independent", "n": 2}, "run": {"mode": "iid"}})
        doc = parse_spec_document(dump_spec_document(manifest.to_document()))

        self.assertEqual(doc, {"channel": {"kind": "independent", "n": 2}, "run": {"mode": "iid"}})

        return

    def test_json_report_document(self):

        parameters = {"channel": {"kind": "cooperative", "n": 2}, "output": {"format": "json"}}
        manifest = RunManifest("capacity", parameters, seeds={"optimizer": 20150101}, duration=0.25)
        report = {
            "manifest": manifest.to_document(),
            "result": {"mode": "iid", "capacity": 1.5},
            "table": {"header": ["mode"], "rows": [["iid"]]},
        }

        doc = parse_spec_document(dump_spec_document(report))
        self.assertEqual(doc, parameters)

        return

    def test_comment_manifest(self):

        text = "\n".join([
            "# command=sweep",
            "# version=1.0.0",
            "# digest=0123456789",
            "# seed/optimizer=20150101",
            "# /channel/kind=\"custom\"",
            "# /channel/up_H=[20.0, 10.0]",
            "# /sweep/grid=[11]",
            "# /sweep/tau=null",
            "p,mi_nats_per_sec",
            "# /channel/n=5",
        ])

        doc = parse_spec_document(text)

        self.assertEqual(doc["channel"], {"kind": "custom", "up_H": [20.0, 10.0]})
        self.assertEqual(doc["sweep"], {"grid": [11], "tau": None})

        return

    def test_comment_manifest_bad_value(self):

        with self.assertRaises(SpecificationError) as ctx:
            parse_spec_document("# command=capacity\n# /channel/n=two\n")

        self.assertEqual(ctx.exception.line, 2)

        return


class TestChannelFromSettings(unittest.TestCase):

    def test_structured_channel(self):

        doc = {"channel": {"kind": "cooperative", "n": 3, "alpha_L": 1.0, "alpha_H": 4.0, "beta": 2.0}}
        ch = channel_from_settings(SettingsMap(doc, DEFAULT_SETTINGS))

        self.assertEqual(ch.kind, ChannelKind.COOPERATIVE)
        self.assertEqual(ch.up_H.tolist(), [4.0, 4.0, 4.0])
        self.assertEqual(ch.down.tolist(), [2.0, 2.0, 2.0])

        return

    def test_default_kind_is_independent(self):

        ch = channel_from_settings(SettingsMap({"channel": {"n": 2, "alpha_L": 1, "alpha_H": 10, "beta": 20}},
                                               DEFAULT_SETTINGS))

        self.assertEqual(ch.kind, ChannelKind.INDEPENDENT)
        self.assertEqual(ch.up_H.tolist(), [20.0, 10.0])
        self.assertEqual(ch.down.tolist(), [20.0, 40.0])

        return

    def test_custom_channel(self):

        doc = {"channel": {"kind": "custom", "up_H": [3.0, 2.0], "up_L": [1.0, 0.5], "down": [1.0, 4.0]}}
        ch = channel_from_settings(SettingsMap(doc, DEFAULT_SETTINGS))

        self.assertEqual(ch.kind, ChannelKind.CUSTOM)
        self.assertEqual(ch.n, 2)

        doc["channel"]["n"] = 3
        with self.assertRaises(SpecificationError) as ctx:
            channel_from_settings(SettingsMap(doc, DEFAULT_SETTINGS))
        self.assertEqual(ctx.exception.field, "/channel/n")

        return

    def test_field_errors(self):

        with self.assertRaises(SpecificationError) as ctx:
            channel_from_settings(SettingsMap({"channel": {"n": 2, "alpha_L": 1, "beta": 20}}, DEFAULT_SETTINGS))
        self.assertEqual(ctx.exception.field, "/channel/alpha_H")

        with self.assertRaises(SpecificationError) as ctx:
            channel_from_settings(SettingsMap({"channel": {"n": 2.5, "alpha_L": 1, "alpha_H": 2, "beta": 20}},
                                              DEFAULT_SETTINGS))
        self.assertEqual(ctx.exception.field, "/channel/n")

        with self.assertRaises(SpecificationError) as ctx:
            channel_from_settings(SettingsMap({"channel": {"kind": "allosteric", "n": 2}}, DEFAULT_SETTINGS))
        self.assertEqual(ctx.exception.field, "/channel/kind")

        with self.assertRaises(SpecificationError):
            channel_from_settings(SettingsMap({"channel": {"n": 2, "alpha_L": True, "alpha_H": 2, "beta": 20}},
                                              DEFAULT_SETTINGS))

        return

    def test_invalid_rates(self):

        with self.assertRaises(ChannelValidationError):
            channel_from_settings(SettingsMap({"channel": {"n": 0, "alpha_L": 1, "alpha_H": 2, "beta": 20}},
                                              DEFAULT_SETTINGS))

        return

    def test_document_rebuilds_channel(self):

        for ch in (build_cooperative_channel(3, ReceptorKinetics(0.5, 2.0, 3.0)),
                   build_custom_channel([3.0, 2.0], [1.0, 0.5], [1.0, 4.0])):
            doc = parse_spec_document(dump_spec_document(spec_document_for_channel(ch)))
            rebuilt = channel_from_settings(SettingsMap(doc, DEFAULT_SETTINGS))

            self.assertEqual(rebuilt.kind, ch.kind)
            self.assertEqual(rebuilt.up_H.tolist(), ch.up_H.tolist())
            self.assertEqual(rebuilt.up_L.tolist(), ch.up_L.tolist())
            self.assertEqual(rebuilt.down.tolist(), ch.down.tolist())

        return


if __name__ == '__main__':
    unittest.main()

import pytest

from beamopt.errors import SpecError
from beamopt.harness.configio import HEADER, canonical_text, default_spec, parse_config


class TestPresets:
    def test_tletter_defaults(self):
        spec = default_spec("tletter")
        assert spec.variables == (("F", 10.0, 60.0), ("M", 175.0, 225.0))
        assert spec.ga.target == 1e-7
        assert spec.grid == (20, 20)

    def test_iletter_defaults(self):
        spec = default_spec("iletter")
        assert spec.alpha == 0.0
        reg = default_spec("iletter-reg")
        assert reg.alpha == 1e-9

    def test_thickness_defaults(self):
        shear = default_spec("thickness-shear")
        assert shear.mass_limit == 30000.0
        names = shear.variable_names()
        assert names == ("h1", "h2", "h3", "h4")
        disp = default_spec("thickness-disp")
        assert disp.variables[3] == ("h4", 5.0, 25.0)

    def test_unknown_preset(self):
        with pytest.raises(SpecError):
            default_spec("zletter")


class TestParsing:
    def test_minimal_config(self):
        spec = parse_config(f"{HEADER}\n[experiment]\npreset = tletter\n")
        assert spec == default_spec("tletter")

    def test_preset_with_method_and_grid(self):
        text = "\n".join(
            [
                HEADER,
                "[experiment]",
                "preset = tletter",
                "method = surface-sequential",
                "[surface]",
                "grid = 20, 20",
            ]
        )
        spec = parse_config(text)
        assert spec.method == "surface-sequential"
        assert spec.grid == (20, 20)
        assert spec.variables == (("F", 10.0, 60.0), ("M", 175.0, 225.0))

    def test_round_trip_is_identity(self):
        for preset in ("tletter", "iletter", "iletter-reg", "thickness-shear", "thickness-disp"):
            spec = default_spec(preset)
            assert parse_config(canonical_text(spec)) == spec

    def test_missing_header(self):
        with pytest.raises(SpecError):
            parse_config("[experiment]\npreset = tletter\n")

    def test_missing_experiment_section(self):
        with pytest.raises(SpecError):
            parse_config(f"{HEADER}\n[ga]\npool_rate = 10\n")

    def test_unknown_key_rejected(self):
        text = f"{HEADER}\n[experiment]\npreset = tletter\nflavor = spicy\n"
        with pytest.raises(SpecError, match="flavor"):
            parse_config(text)

    def test_unknown_section_rejected(self):
        text = f"{HEADER}\n[experiment]\npreset = tletter\n[mystery]\nx = 1\n"
        with pytest.raises(SpecError, match="mystery"):
            parse_config(text)

    def test_malformed_number(self):
        text = f"{HEADER}\n[experiment]\npreset = tletter\nruns = often\n"
        with pytest.raises(SpecError, match="often"):
            parse_config(text)

    def test_empty_variable_box_names_variable(self):
        text = f"{HEADER}\n[experiment]\npreset = tletter\n[variables]\nF = 30, 30\n"
        with pytest.raises(SpecError, match="'F'"):
            parse_config(text)

    def test_unknown_variable_names_expected_set(self):
        text = f"{HEADER}\n[experiment]\npreset = tletter\n[variables]\nQ = 0, 1\n"
        with pytest.raises(SpecError, match="Q"):
            parse_config(text)

    def test_ga_overrides(self):
        text = "\n".join(
            [
                HEADER,
                "[experiment]",
                "preset = tletter",
                "[ga]",
                "pool_rate = 30",
                "target = none",
                "stall_generations = 12",
            ]
        )
        spec = parse_config(text)
        assert spec.ga.pool_rate == 30
        assert spec.ga.target is None
        assert spec.ga.stall_generations == 12

    def test_bad_ga_value_reported(self):
        text = f"{HEADER}\n[experiment]\npreset = tletter\n[ga]\nradioactivity = 2.0\n"
        with pytest.raises(SpecError):
            parse_config(text)

    def test_comments_and_blank_lines_ignored(self):
        text = "\n".join(
            [
                HEADER,
                "",
                "# a comment",
                "[experiment]",
                "preset = iletter",
                "  # another",
                "seed = 3",
            ]
        )
        spec = parse_config(text)
        assert spec.preset == "iletter" and spec.seed == 3

import pytest
from configManager import units
from configManager.scenarioHandler import (ScenarioConfig, dump_scenario, list_presets, load_preset, load_scenario,
                                           parse_scenario, preset_text)
from functions.errors import ScenarioError
from conftest import SMALL_HBT, SMALL_SCENARIO


def scenario_error(text):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert info.value.exit_code == 2
    return info.value


def test_bundled_presets():
    assert list_presets() == ["fig2", "fig3", "hbt", "hbt_jitter"]
    fig2 = load_preset("fig2")
    assert fig2.kind == "focused_image" and fig2.mask == "pinhole_pair"
    assert (fig2.pinhole_d1, fig2.pinhole_d2, fig2.pinhole_separation) == (0.77e-3, 0.72e-3, 3.66e-3)
    assert fig2.z1 == fig2.z2 == 1.7
    assert fig2.detector_aperture == 1.8e-3 and fig2.scan_step == 0.25e-3
    fig3 = load_preset("fig3")
    z2 = fig3.z2_values()
    assert len(z2) == 21
    assert z2[0] == pytest.approx(0.2) and z2[10] == pytest.approx(0.3) and z2[-1] == pytest.approx(0.4)
    hbt = load_preset("hbt")
    assert hbt.coherence_time == 1e-10 and hbt.trace_step == 1e-11
    assert load_preset("hbt_jitter").jitter_start == 0.35e-9


@pytest.mark.parametrize("name", ["fig2", "fig3", "hbt", "hbt_jitter"])
def test_normalized_dump_parses_back(name):
    cfg = load_preset(name)
    assert parse_scenario(dump_scenario(cfg)) == cfg


def test_dump_lists_every_key_in_canonical_units():
    text = dump_scenario(parse_scenario(SMALL_HBT))
    assert "coherence_time: 1e-10 s\n" in text
    assert "start_rate: 8000000000.0 Hz\n" in text
    assert "z1: null\n" in text
    assert "independent_stop: false\n" in text


def test_unknown_key_names_field_and_line():
    err = scenario_error("kind: focused_image\nwavelength: 693 nm\nlense_focal: 20 cm\n")
    assert err.field == "lense_focal"
    assert err.line == 3
    assert "line 3" in str(err)


def test_duplicate_and_nested_keys():
    err = scenario_error("kind: hbt\nduration: 1 ms\nduration: 2 ms\n")
    assert (err.field, err.line) == ("duration", 3)
    err = scenario_error("kind: hbt\nduration:\n  value: 1 ms\n")
    assert (err.field, err.line) == ("duration", 2)


def test_values_are_checked():
    assert scenario_error("kind: focused_image\nwavelength: 693 parsecs\n").field == "wavelength"
    assert scenario_error("kind: sideways\n").field == "kind"
    assert scenario_error("kind: hbt\nindependent_stop: yes\n").field == "independent_stop"
    assert scenario_error(SMALL_HBT.replace("seed: 11", "seed: -1")).field == "seed"


def test_required_keys():
    assert scenario_error("wavelength: 693 nm\n").field == "kind"
    assert scenario_error("kind: focused_image\nwavelength: 693 nm\nsource_half_width: 1 mm\nz1: 1 m\n").field \
        == "mask"
    text = SMALL_SCENARIO.replace("slit_separation: 500 um\n", "")
    assert scenario_error(text).field == "slit_separation"


def test_cross_field_rules():
    assert scenario_error(SMALL_HBT + "method: analytic\n").field == "method"
    sweep = ("kind: z2_sweep\nwavelength: 693 nm\nsource_half_width: 6 mm\nz1: 300 mm\nmask: single_point\n"
             "z2_min: 400 mm\nz2_max: 200 mm\nz2_steps: 5\n")
    assert scenario_error(sweep).field == "z2_max"
    assert scenario_error(SMALL_SCENARIO.replace("z1: 200 mm", "z1: 0 mm")).field == "z1"
    assert scenario_error(SMALL_SCENARIO + "jitter_start: -1 ns\n").field == "jitter_start"


def test_document_shape():
    scenario_error("")
    scenario_error("- kind: hbt\n")
    err = scenario_error("kind: hbt\nduration: 1 ms\n bin_width: 10 ps\n")
    assert err.line == 3


def test_null_keeps_concrete_defaults():
    cfg = parse_scenario(SMALL_SCENARIO + "n_batches: null\nscan_step: ~\n")
    assert cfg.n_batches == 16
    assert cfg.scan_step is None
    assert cfg.reference_distance == 0.2


def test_overrides_are_validated():
    cfg = parse_scenario(SMALL_SCENARIO)
    changed = cfg.with_overrides(seed=5, method=None, threads=4)
    assert (changed.seed, changed.method, changed.threads) == (5, "montecarlo", 4)
    assert cfg.seed == 7
    with pytest.raises(ScenarioError):
        cfg.with_overrides(n_realizations=1)
    assert isinstance(changed, ScenarioConfig)


def test_files_and_presets_that_do_not_exist(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(str(tmp_path / "missing.yaml"))
    with pytest.raises(ScenarioError):
        preset_text("fig4")


def test_scenario_files(write_scenario):
    assert load_scenario(write_scenario(SMALL_SCENARIO)) == parse_scenario(SMALL_SCENARIO)


@pytest.mark.parametrize("text, quantity, expected", [
    ("693 nm", "length", 693e-9),
    ("693nm", "length", 693e-9),
    ("0.835 mm", "length", 0.835e-3),
    ("100 µm", "length", 100e-6),
    ("1.7", "length", 1.7),
    ("0.35 ns", "time", 0.35e-9),
    ("10 ps", "time", 1e-11),
    ("2 MHz", "rate", 2e6),
    ("8 GHz", "rate", 8e9),
])
def test_unit_parsing(text, quantity, expected):
    assert units.parse_quantity(text, quantity) == expected


@pytest.mark.parametrize("text, quantity", [("5 ns", "length"), ("nm", "length"), ("1.2.3 m", "length"),
                                            ("inf m", "length")])
def test_unit_errors(text, quantity):
    with pytest.raises(units.UnitError):
        units.parse_quantity(text, quantity)


def test_canonical_spelling_reads_back():
    for value in (692.9e-9, 1e-10, 0.1 + 0.2, 8e9):
        for quantity in ("length", "time", "rate"):
            assert units.parse_quantity(units.format_quantity(value, quantity), quantity) == value


def test_detector_points_must_fit_the_scan_step():
    err = scenario_error(SMALL_SCENARIO + "scan_step: 50 um\ndetector_points: 401\n")
    assert err.field == "detector_points"
    assert "x2_half_window" in str(err)
    err = scenario_error(SMALL_SCENARIO + "scan_step: 50 um\nx2_half_window: 1 mm\ndetector_points: 400\n")
    assert (err.field, err.line) == ("detector_points", 14)
    assert "40*j + 1" in str(err)
    cfg = parse_scenario(SMALL_SCENARIO + "scan_step: 50 um\nx2_half_window: 1 mm\ndetector_points: 401\n")
    assert cfg.detector_points == 401


def test_context_keeps_the_error_class_and_location():
    err = ScenarioError("must be positive", line=3, field="seed")
    wrapped = err.in_context("focused_image/montecarlo")
    assert type(wrapped) is ScenarioError
    assert (wrapped.line, wrapped.field, wrapped.exit_code) == (3, "seed", 2)
    assert str(wrapped).startswith("focused_image/montecarlo: ")
    assert str(wrapped).endswith(str(err))
    assert (err.line, err.field) == (3, "seed")

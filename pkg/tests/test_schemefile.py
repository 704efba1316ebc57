import pytest

from lbmfd import catalog
from lbmfd.schemefile import (
    ENV_VAR,
    SchemeFileError,
    builtin_dir,
    format_scheme_file,
    load_scheme,
    parse_scheme_file,
)

D1Q3_TEXT = (builtin_dir() / "d1q3.scheme").read_text()


@pytest.mark.parametrize("name", sorted(catalog.CATALOG))
def test_shipped_file_equals_catalog(name):
    assert load_scheme(name) == catalog.get(name)


@pytest.mark.parametrize("name", sorted(catalog.CATALOG))
def test_format_round_trip(name):
    spec = catalog.get(name)
    assert parse_scheme_file(format_scheme_file(spec)) == spec


def replace_section(text, section, body):
    lines = text.splitlines()
    start = lines.index(f"[{section}]")
    end = next((k for k in range(start + 1, len(lines)) if lines[k].startswith("[")), len(lines))
    return "\n".join(lines[: start + 1] + body + [""] + lines[end:]) + "\n"


def error_of(text):
    with pytest.raises(SchemeFileError) as err:
        parse_scheme_file(text)
    return err.value


def test_velocity_count_mismatch():
    err = error_of(replace_section(D1Q3_TEXT, "velocities", ["0", "1"]))
    assert "3 but 2 velocities" in str(err) and err.line > 0


def test_unknown_moment_in_equilibrium():
    text = D1Q3_TEXT.replace("m3 = 2*lambda^2*D*m1", "m3 = 2*lambda^2*D*m5")
    err = error_of(text)
    assert "m5" in str(err)
    line = text.splitlines().index("m3 = 2*lambda^2*D*m5") + 1
    assert err.line == line and err.column == 6


def test_non_integer_velocity():
    err = error_of(replace_section(D1Q3_TEXT, "velocities", ["0", "1/2", "-1"]))
    assert "integer" in str(err) and err.column == 1


def test_float_literal_points_at_column():
    text = D1Q3_TEXT.replace("m2 = lambda*C*m1", "m2 = 0.5*m1")
    err = error_of(text)
    assert "floating-point" in str(err) and err.column == 7


def test_nonzero_conserved_rate():
    text = replace_section(D1Q3_TEXT, "relaxation", ["s", "s", "p"])
    err = error_of(text)
    assert "must be 0" in str(err)
    assert text.splitlines()[err.line - 1] == "s"


@pytest.mark.parametrize("edit, message", [
    (lambda t: t.replace("[velocities]", "[speeds]"), "unknown section"),
    (lambda t: t.replace("[equilibria]\n", "").replace("m2 =", "#"), "missing section"),
    (lambda t: "q = 3\n" + t, "before the first section"),
    (lambda t: t.replace("d = 1", "d = one"), "d must be an integer"),
    (lambda t: t.replace("0, lambda, -lambda", "0, lambda"), "row needs 3 entries"),
    (lambda t: t.replace("m2 = lambda*C*m1", "m2 lambda*C*m1"), "mK = expression"),
])
def test_structural_errors(edit, message):
    assert message in str(error_of(edit(D1Q3_TEXT)))


def test_comments_and_blank_lines_are_ignored():
    text = "# header comment\n\n" + D1Q3_TEXT.replace("[velocities]", "[velocities]  # c_j")
    assert parse_scheme_file(text) == catalog.d1q3()


def test_search_path_from_environment(tmp_path, monkeypatch):
    spec = catalog.d1q3().substitute(p=1)
    (tmp_path / "mine.scheme").write_text(format_scheme_file(spec))
    monkeypatch.setenv(ENV_VAR, str(tmp_path))
    assert load_scheme("mine") == spec
    # an entry in the user directory shadows the shipped one
    (tmp_path / "d1q3.scheme").write_text(format_scheme_file(spec))
    assert load_scheme("d1q3") == spec
    monkeypatch.delenv(ENV_VAR)
    assert load_scheme("d1q3") == catalog.d1q3()
    with pytest.raises(FileNotFoundError):
        load_scheme("mine")

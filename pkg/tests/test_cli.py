import json

import pytest
from click.testing import CliRunner

from drinfeldlab import cli, report
from drinfeldlab.cli import FormParseError, parse_form, print_form
from drinfeldlab.config import CheckRow, config_for_q
from drinfeldlab.generators import carlitz_context

ROUND_TRIPS = [
    (2, "E"),
    (2, "E^2*g+E*h"),
    (2, "E^2+g*h"),
    (2, "(theta^2+1)*E*g"),
    (2, "(theta+1)/(theta^2)*h"),
    (2, "g*g*g"),
    (2, "  E ^ 2 + g * h "),
    (3, "theta*E*g - h"),
    (3, "E^3+h*g"),
    (3, "2*E^2*g"),
    (4, "3*g^2"),
]


@pytest.mark.parametrize("q,lit", ROUND_TRIPS)
def test_parse_print_round_trip(q, lit):
    C = carlitz_context(q)
    f = parse_form(C, lit)
    s = print_form(f)
    g = parse_form(C, s)
    assert (f - g).is_zero(), f"{lit!r} printed as {s!r}"


def test_print_is_canonical():
    C = carlitz_context(2)
    assert print_form(parse_form(C, "g*g*g")) == "g^3"
    assert print_form(parse_form(C, "(theta)*(theta+1)*E")) == "(theta^2+theta)*E"
    assert print_form(parse_form(C, "E") - parse_form(C, "E")) == "0"


@pytest.mark.parametrize(
    "q,lit,pos",
    [
        (2, "E +", 3),
        (2, "", 0),
        (2, "x*E", 0),
        (2, "E)", 1),
        (2, "E^2+g", 4),  # mixed weight
        (4, "7*E", 0),  # code beyond the field order
        (2, "(theta+1)/(0)", 10),
    ],
)
def test_parse_errors_carry_positions(q, lit, pos):
    C = carlitz_context(q)
    with pytest.raises(FormParseError) as exc:
        parse_form(C, lit)
    assert exc.value.pos == pos
    assert f"position {pos}" in str(exc.value)


def test_scan_csv_column_order():
    row = {"q": 2, "w": 5, "m": 0, "l": 1, "dim": 3, "max_nu": 2,
           "conj_bound": 4, "thm_bound": 100, "ratio": "1/2", "flag": False}
    text = report.scan_csv([row])
    lines = text.splitlines()
    assert lines[0] == "q,w,m,l,dim,max_nu,conj_bound,thm_bound,ratio"
    assert lines[1] == "2,5,0,1,3,2,4,100,1/2"


def test_structured_document_shape():
    cfg = config_for_q(2)
    doc = json.loads(report.structured("battery", cfg, {"rows": []}))
    assert doc["format"] == "drinfeld-lab/report/v1"
    assert doc["kind"] == "battery"
    assert doc["config"]["p"] == 2
    assert doc["config"]["sample_version"] == cfg.sample_version
    # canonical serialization: reserializing must reproduce the text
    text = report.structured("battery", cfg, {"rows": []})
    assert json.dumps(doc, indent=2, sort_keys=True) + "\n" == text


def test_figure_rows_writes_png(tmp_path):
    rows = [CheckRow("a", "ok", "relative residual y^62, threshold y^20"),
            CheckRow("b", "ok", "relative residual y^71, threshold y^20")]
    p = tmp_path / "rows.png"
    report.figure_rows(rows, p)
    assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_certificate_payload_drops_wall_clock():
    class Rep:
        q = w = l = m = mu = nu = k = 1
        mu_is_default = hypotheses_met = conclusive = True
        n_aux = aux_deg_t = v_fk = w_fk = w_rho = 0
        branch = "resultant"
        v_rho = rho_ceiling = bound = measured = None
        elapsed = 1.23
        rows = []

    payload = report.certificate_payload(Rep())
    assert "elapsed" not in payload


def run_cli(args):
    return CliRunner().invoke(cli.main, args, catch_exceptions=False)


def test_expand_command(tmp_path):
    out = tmp_path / "exp"
    res = run_cli(["expand", "--q", "2", "--N", "8", "--out", str(out)])
    assert res.exit_code == 0, res.output
    csv_text = (out / "expand.csv").read_text()
    assert csv_text.splitlines()[0] == "series,n,coefficient"
    assert "h_bold,1,1" in csv_text
    assert (out / "expand.png").exists()


def test_battery_command(tmp_path):
    out = tmp_path / "bat"
    res = run_cli(["battery", "--q", "2", "--N", "20", "--Dt", "6",
                   "--precision", "30", "--out", str(out), "--format", "structured"])
    assert res.exit_code == 0, res.output
    doc = json.loads((out / "battery.json").read_text())
    assert doc["kind"] == "battery"
    assert all(r["status"] == "ok" for r in doc["rows"])


def test_scan_command_frozen_first_row(tmp_path):
    out = tmp_path / "sc"
    res = run_cli(["scan", "--q", "2", "--wmax", "8", "--lmax", "2",
                   "--out", str(out)])
    assert res.exit_code == 0, res.output
    lines = (out / "scan.csv").read_text().splitlines()
    # weight 2, depth 1 is spanned by E alone, which vanishes to order
    # exactly 1, so the ratio against l(w-l) = 1 is 1
    assert lines[1] == "2,2,0,1,2,1,1,1512,1"
    assert "0 ratio flags" in res.output


def test_scan_jobs_do_not_change_bytes(tmp_path):
    one = tmp_path / "one"
    two = tmp_path / "two"
    for out, jobs in ((one, "1"), (two, "3")):
        res = run_cli(["scan", "--q", "2", "--wmax", "8", "--lmax", "2",
                       "--jobs", jobs, "--out", str(out)])
        assert res.exit_code == 0, res.output
    assert (one / "scan.csv").read_bytes() == (two / "scan.csv").read_bytes()
    assert (one / "scan.png").read_bytes() == (two / "scan.png").read_bytes()


def test_spaces_command(tmp_path):
    out = tmp_path / "sp"
    res = run_cli(["spaces", "--q", "2", "--wmax", "10", "--lmax", "1",
                   "--out", str(out)])
    assert res.exit_code == 0, res.output
    lines = (out / "spaces.csv").read_text().splitlines()
    assert lines[0] == "w,m,l,dim,basis"
    assert "3,0,0,2,g^3 h" in lines
    assert "w=10 m=0 l=0" in res.output


def test_certify_rejects_bad_literal():
    res = CliRunner().invoke(cli.main, ["certify", "E^2+g", "--q", "2"])
    assert res.exit_code == 2
    assert "position" in res.output


def test_command_reruns_are_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        res = run_cli(["expand", "--q", "3", "--N", "12", "--out", str(out),
                       "--format", "structured"])
        assert res.exit_code == 0, res.output
        outs.append(out)
    a, b = outs
    assert (a / "expand.json").read_bytes() == (b / "expand.json").read_bytes()
    assert (a / "expand.png").read_bytes() == (b / "expand.png").read_bytes()

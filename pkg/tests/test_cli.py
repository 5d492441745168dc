import io
import json
import math

import pytest

from nwidths.cli import EXIT_INVALID, EXIT_OK, EXIT_VERIFY, main, parse_body
from nwidths import bodies as bd


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


class TestOrder:
    def test_case5_example(self):
        code, text = run(["order", "--p0", "4", "--p1", "1", "--q", "2",
                          "--m", "100", "--n", "30", "--k", "16"])
        assert code == EXIT_OK
        header, row = text.strip().split("\n")
        assert header == "p0,p1,q,m,k,n,value,case,regime,trace"
        cells = row.split(",")
        assert float(cells[6]) == 2.0
        assert cells[7] == "Case5"

    def test_case6_example(self):
        code, text = run(["order", "--p0", "inf", "--p1", "2", "--q", "1",
                          "--m", "16", "--n", "5", "--k", "4"])
        assert code == EXIT_OK
        assert ",8," in text and "Case6" in text

    def test_uncovered_exits_invalid(self):
        code, _ = run(["order", "--p0", "2", "--p1", "1", "--q", "inf",
                       "--m", "16", "--n", "2", "--k", "4"])
        assert code == EXIT_INVALID

    def test_requires_k_xor_nu(self):
        code, _ = run(["order", "--p0", "4", "--p1", "1", "--q", "2",
                       "--m", "16", "--n", "2"])
        assert code == EXIT_INVALID
        code, _ = run(["order", "--p0", "4", "--p1", "1", "--q", "2",
                       "--m", "16", "--n", "2", "--k", "2", "--nu", "2"])
        assert code == EXIT_INVALID

    def test_json_mode(self):
        code, text = run(["order", "--p0", "4", "--p1", "1", "--q", "2",
                          "--m", "100", "--n", "30", "--k", "16", "--json"])
        assert code == EXIT_OK
        doc = json.loads(text)
        assert doc["value"] == 2.0
        assert doc["case"] == "Case5"
        assert "Incl-3" in doc["trace"]
        assert doc["seed"] == 0

    def test_nu_clamp_low(self):
        code, text = run(["order", "--p0", "4", "--p1", "1", "--q", "2",
                          "--m", "16", "--n", "2", "--nu", "0.5", "--json"])
        assert code == EXIT_OK
        assert json.loads(text)["case"] == "NuClampLow"

    def test_bad_flag_exits_invalid(self):
        code, _ = run(["order", "--p0", "4", "--nonsense", "1"])
        assert code == EXIT_INVALID


class TestSweep:
    def test_monotone_column(self):
        code, text = run(["sweep", "--p0", "3", "--p1", "1", "--q", "6",
                          "--m", "64", "--k", "4", "--n-min", "1",
                          "--n-max", "32"])
        assert code == EXIT_OK
        lines = text.strip().split("\n")
        assert lines[0] == "p0,p1,q,m,k,n,value,case,regime"
        vals = [float(l.split(",")[6]) for l in lines[1:]]
        assert len(vals) == 32
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_k_equals_m_matches_outer_ball_column(self):
        from nwidths.order_engine import order_ball

        code, text = run(["sweep", "--p0", "3", "--p1", "1", "--q", "6",
                          "--m", "64", "--k", "64", "--n-min", "0",
                          "--n-max", "32"])
        assert code == EXIT_OK
        for line in text.strip().split("\n")[1:]:
            cells = line.split(",")
            n, val = int(cells[5]), float(cells[6])
            assert val == order_ball(3, 6, 64, n)

    def test_boundary_crossing_is_smooth(self):
        # adjacent rows around n* differ by a grid-density-limited amount
        code, text = run(["sweep", "--p0", "3", "--p1", "1", "--q", "4",
                          "--m", "4096", "--k", "16", "--n-min", "1000",
                          "--n-max", "1100"])
        assert code == EXIT_OK
        vals = [float(l.split(",")[6]) for l in text.strip().split("\n")[1:]]
        for a, b in zip(vals, vals[1:]):
            assert abs(a - b) / a <= 0.001

    def test_svg_written(self, tmp_path):
        svg = tmp_path / "plot.svg"
        code, _ = run(["sweep", "--p0", "3", "--p1", "1", "--q", "6",
                       "--m", "64", "--k", "4", "--n-min", "1",
                       "--n-max", "32", "--svg", str(svg)])
        assert code == EXIT_OK
        content = svg.read_text()
        assert content.startswith("<svg")
        assert "polyline" in content
        assert "n*" in content and "m^(2/q)" in content


class TestVerify:
    @pytest.mark.parametrize("suite", ["boundaries", "reductions"])
    def test_structural_suites_pass(self, suite):
        code, text = run(["verify", "--suite", suite])
        assert code == EXIT_OK
        assert ",fail" not in text

    def test_inclusions_pass(self):
        code, text = run(["verify", "--suite", "inclusions", "--m-max", "5"])
        assert code == EXIT_OK

    def test_interpolation_pass(self):
        code, text = run(["verify", "--suite", "interpolation",
                          "--samples", "2000", "--seed", "7"])
        assert code == EXIT_OK

    def test_interpolation_negative_control(self):
        code, text = run(["verify", "--suite", "interpolation",
                          "--samples", "500", "--corrupt-lambda", "0.2"])
        assert code == EXIT_VERIFY
        assert ",fail" in text

    def test_duality_pass(self):
        code, text = run(["verify", "--suite", "duality", "--samples", "40",
                          "--m-max", "4"])
        assert code == EXIT_OK

    def test_unknown_suite_rejected(self):
        code, _ = run(["verify", "--suite", "everything"])
        assert code == EXIT_INVALID


class TestEstimate:
    def test_cube_exact(self):
        code, text = run(["estimate", "--body", "ball:inf", "--m", "4",
                          "--n", "1", "--q", "1", "--restarts", "3",
                          "--ascent-iters", "50"])
        assert code == EXIT_OK
        header, row = text.strip().split("\n")
        assert header == ("body,m,n,q,upper,lower,lower_method,order_value,"
                          "ratio,seed,wall_ms")
        cells = row.split(",")
        upper, lower = float(cells[4]), float(cells[5])
        assert lower == pytest.approx(3.0, rel=1e-12)
        assert 3.0 - 1e-9 <= upper <= 1.02 * 3.0
        assert cells[6] == "ExactThmB"

    def test_vk_pca(self):
        code, text = run(["estimate", "--body", "vk:3", "--m", "6",
                          "--n", "2", "--q", "2", "--restarts", "3",
                          "--ascent-iters", "60"])
        assert code == EXIT_OK
        row = text.strip().split("\n")[1].split(",")
        assert float(row[5]) == pytest.approx(math.sqrt(2), rel=1e-9)
        assert row[6] == "PCA-l2"

    def test_intersection_radius(self):
        code, text = run(["estimate", "--body", "intersection:inf,1,3",
                          "--m", "9", "--n", "0", "--q", "2",
                          "--restarts", "3", "--ascent-iters", "60"])
        assert code == EXIT_OK
        row = text.strip().split("\n")[1]
        # the body spec is quoted because it contains commas
        assert row.startswith('"intersection:inf,1,3",9,0,2,')
        upper = float(row.split('",')[1].split(",")[3])
        assert upper == pytest.approx(math.sqrt(3), rel=0.02)

    def test_compare_order(self):
        code, text = run(["estimate", "--body", "ball:inf", "--m", "4",
                          "--n", "1", "--q", "1", "--restarts", "2",
                          "--ascent-iters", "40", "--compare-order"])
        assert code == EXIT_OK
        cells = text.strip().split("\n")[1].split(",")
        assert float(cells[7]) == 3.0  # order_value
        assert float(cells[8]) == pytest.approx(float(cells[4]) / 3.0)

    def test_json_has_certificate(self):
        code, text = run(["estimate", "--body", "vk:2", "--m", "4",
                          "--n", "1", "--q", "2", "--restarts", "2",
                          "--ascent-iters", "40", "--json"])
        assert code == EXIT_OK
        doc = json.loads(text)
        assert len(doc["upper_certificate"]) == 1
        assert len(doc["upper_certificate"][0]) == 4
        assert doc["status"] == "ok"

    def test_bad_body_spec(self):
        code, _ = run(["estimate", "--body", "donut:3", "--m", "4",
                       "--n", "1", "--q", "2"])
        assert code == EXIT_INVALID

    def test_vertex_cap_exceeded(self):
        code, _ = run(["estimate", "--body", "ball:inf", "--m", "40",
                       "--n", "1", "--q", "2", "--vertex-cap", "100"])
        assert code == EXIT_INVALID


class TestParseBody:
    def test_variants(self):
        assert isinstance(parse_body("ball:2", 4), bd.Ball)
        assert isinstance(parse_body("vk:3", 6), bd.VkPolytope)
        inter = parse_body("intersection:inf,1,3", 9)
        assert inter.nu == 3.0
        cube = parse_body("cube:0.5", 4)
        assert cube.c == 0.5

    def test_extrapolated_vk(self):
        body = parse_body("vk:2.5", 6)
        assert body.extrapolated


class TestDeterminism:
    def test_estimate_repeatable_modulo_wall_time(self):
        argv = ["estimate", "--body", "intersection:inf,1,2", "--m", "8",
                "--n", "2", "--q", "2", "--seed", "3", "--restarts", "3",
                "--ascent-iters", "50"]
        _, a = run(argv)
        _, b = run(argv)
        strip = lambda t: t.rsplit(",", 1)[0]
        assert strip(a) == strip(b)

    def test_verify_bytes_identical(self):
        argv = ["verify", "--suite", "interpolation", "--samples", "500",
                "--seed", "11"]
        _, a = run(argv)
        _, b = run(argv)
        assert a == b

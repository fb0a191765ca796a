import csv
import io
import json

import pytest

from audioactive import cli, pipeline
from audioactive import io as aio
from audioactive.cli import EXIT_BUDGET, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, JobConfig, UsageError, main
from audioactive.errors import VerificationError
from audioactive.rewrite import RuleSpec, compress


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestSeq:
    def test_stutter_seed_0(self, capsys):
        code, out, _ = run(capsys, "seq", "--seed", "0", "--terms", "6")
        assert code == EXIT_OK
        assert out.split() == ["0", "10", "1110", "333110", "333322110", "4444322222110"]

    def test_standard(self, capsys):
        _, out, _ = run(capsys, "seq", "--rule", "standard", "--seed", "111", "--terms", "4")
        assert out.split() == ["111", "31", "1311", "111321"]

    def test_ten_ones(self, capsys):
        _, out, _ = run(capsys, "seq", "--seed", "1111111111", "--terms", "2")
        assert out.split()[1] == "101010101010101010101"

    def test_json_and_rle(self, capsys):
        _, out, _ = run(capsys, "seq", "--seed", "0", "--terms", "22", "--format", "json")
        terms = json.loads(out)
        assert len(terms) == 22
        long = [t for t in terms if t.startswith("rle:")]
        assert long and all(len(aio.undisplay(t)) > aio.RLE_THRESHOLD for t in long)

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "sub" / "seq.txt"
        code, out, _ = run(capsys, "seq", "--terms", "3", "-o", str(target))
        assert code == EXIT_OK and out == ""
        assert target.read_text() == "0\n10\n1110\n"


class TestRatios:
    def test_default_count(self, capsys):
        _, out, _ = run(capsys, "ratios")
        lines = out.splitlines()
        assert len(lines) == 55
        assert lines[0] == "1 2"
        assert abs(float(lines[-1].split()[1]) - 1.45187) < 1e-2

    def test_single_ratio(self, capsys):
        _, out, _ = run(capsys, "ratios", "--count", "1")
        assert out == "1 2\n"

    def test_both(self, capsys):
        _, out, _ = run(capsys, "ratios", "--both", "--count", "55")
        lines = out.splitlines()
        assert lines[0] == "# index stutter standard"
        k, s, t = lines[-1].split()
        assert k == "55"
        assert abs(float(s) - 1.45187) < 1e-2
        assert abs(float(t) - 1.30405) < 1e-2


class TestExitCodes:
    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["seq", "--bogus"])
        assert info.value.code == EXIT_USAGE

    def test_invalid_combination(self, capsys):
        code, _, err = run(capsys, "seq", "--rule", "standard", "--j", "3")
        assert code == EXIT_USAGE
        assert len(err.strip().splitlines()) == 1 and "--j" in err

    def test_bad_seed_digit(self, capsys):
        code, _, err = run(capsys, "seq", "--base", "3", "--seed", "5")
        assert code == EXIT_USAGE

    def test_budget(self, capsys, tmp_path):
        target = tmp_path / "seq.txt"
        code, _, err = run(capsys, "seq", "--terms", "40", "--digit-limit", "1000", "-o", str(target))
        assert code == EXIT_BUDGET
        partial = (tmp_path / "seq.txt.partial").read_text().split()
        assert partial[:3] == ["0", "10", "1110"]
        assert not target.exists()

    def test_element_budget(self, capsys, tmp_path):
        code, _, _ = run(capsys, "chem", "--max-elements", "50", "-o", str(tmp_path))
        assert code == EXIT_BUDGET

    def test_verification_failure(self, capsys, tmp_path, monkeypatch):
        def broken(*args, **kwargs):
            raise VerificationError("CRT lift disagrees with check prime")

        monkeypatch.setattr(pipeline, "char_poly", broken)
        code, _, err = run(capsys, "charpoly", "--base", "2", "-o", str(tmp_path))
        assert code == EXIT_VERIFY and "verification" in err


class TestConfig:
    def test_flags_override_file(self, capsys, tmp_path):
        cfg = tmp_path / "job.toml"
        cfg.write_text('rule = "standard"\nseed = "1"\nterms = 5\n')
        _, out, _ = run(capsys, "seq", "--config", str(cfg), "--terms", "3")
        assert out.split() == ["1", "11", "21"]

    def test_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "job.toml"
        cfg.write_text("colour = 3\n")
        code, _, err = run(capsys, "seq", "--config", str(cfg))
        assert code == EXIT_USAGE and "colour" in err

    def test_env_workers(self, monkeypatch):
        monkeypatch.setenv("AUDIOACTIVE_WORKERS", "3")
        args = cli.build_parser().parse_args(["eigen"])
        assert cli.build_config(args).workers == 3

    @pytest.mark.parametrize(
        "kwargs",
        [dict(rule="jstutter"), dict(base=37), dict(seed=""), dict(tol=0.0), dict(precision=0), dict(workers=0)],
    )
    def test_validation(self, kwargs):
        with pytest.raises(UsageError):
            JobConfig(**kwargs).validate()

    def test_parse_range(self):
        assert cli.parse_range("2-5", (0, 0)) == [2, 3, 4, 5]
        assert cli.parse_range(None, (6, 7)) == [6, 7]
        with pytest.raises(UsageError):
            cli.parse_range("5-2", (0, 0))


@pytest.fixture(scope="module")
def chem_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("chem")
    assert main(["chem", "-o", str(d), "--format", "json"]) == EXIT_OK
    return d


class TestChemistryFiles:
    def test_json_round_trip(self, chem_dir, stutter10):
        text = (chem_dir / "chemistry.json").read_text()
        chem = aio.chemistry_from_json(text)
        assert chem == stutter10.chemistry
        assert aio.chemistry_to_json(chem) == text

    def test_long_strings_compressed(self, chem_dir):
        doc = json.loads((chem_dir / "chemistry.json").read_text())
        longest = max(doc["elements"], key=lambda e: e["length"])
        assert longest["length"] == 45_460 and longest["rle"]
        assert all(e.get("rle", False) == (e["length"] > 1000) for e in doc["elements"])

    def test_dot(self, chem_dir, stutter10):
        text = (chem_dir / "decay.dot").read_text()
        nodes = [ln for ln in text.splitlines() if "[label=" in ln and "->" not in ln]
        assert len(nodes) == len(stutter10.chemistry.all_elements())
        assert text.startswith("digraph decay {")

    def test_periodic_table(self, chem_dir):
        rows = list(csv.DictReader(io.StringIO((chem_dir / "periodic_table.csv").read_text())))
        assert len(rows) == 714
        assert rows[0]["id"] == "1" and abs(float(rows[0]["abundance"]) - 27.81585668) < 1e-6

    def test_display_round_trip(self):
        s = "9" * 1500 + "0"
        assert aio.display(s) == "rle:" + compress(s)
        assert aio.undisplay(aio.display(s)) == s
        assert aio.display("10") == "10"

    def test_rule_round_trip(self):
        for rule in (RuleSpec.stutter(3), RuleSpec.standard(), RuleSpec.jstutter(4, 7)):
            assert aio.rule_from_dict(aio.rule_to_dict(rule)) == rule


class TestAnalysisCommands:
    def test_eigen(self, capsys):
        code, out, _ = run(capsys, "eigen", "--format", "json")
        doc = json.loads(out)
        assert code == EXIT_OK
        assert doc["lambda"] == "1.4453300117"
        assert doc["elements"] == 714

    def test_charpoly_small_base(self, capsys, tmp_path):
        code, out, _ = run(capsys, "charpoly", "--base", "3", "--format", "json", "-o", str(tmp_path))
        assert code == EXIT_OK
        assert json.loads(out)["growth_degree"] == 8
        cert = json.loads((tmp_path / "certification.json").read_text())
        assert cert["status"] == "Irreducible" and cert["degree"] == 8
        poly = aio.polynomial_from_json((tmp_path / "charpoly.json").read_text())
        assert poly.degree == 15

    def test_sweep_bases(self, capsys):
        _, out, _ = run(capsys, "sweep-bases", "--range", "2-3")
        lines = out.splitlines()
        assert lines[0] == "b\telements\tlambda\tdegree"
        assert lines[1].split("\t") == ["2", "5", "2.8923039932", "4"]
        assert lines[2].split("\t") == ["3", "15", "2.0062263631", "8"]

    def test_sweep_j(self, capsys):
        _, out, _ = run(capsys, "sweep-j", "--range", "6")
        assert out.splitlines()[1].split("\t")[3] == "7"

    @pytest.mark.parametrize("seed", ["1", "7"])
    def test_audit(self, capsys, seed):
        code, out, _ = run(capsys, "audit", "--seed", seed, "--max-terms", "40")
        doc = json.loads(out)
        assert code == EXIT_OK
        assert doc["audit"]["conformant"]
        assert all(doc["tail"]["cycle_known"])

    def test_export_deterministic_across_workers(self, capsys, tmp_path):
        a, b = tmp_path / "w1", tmp_path / "w2"
        assert main(["export", "--base", "4", "--count", "20", "--workers", "1", "-o", str(a)]) == EXIT_OK
        assert main(["export", "--base", "4", "--count", "20", "--workers", "2", "-o", str(b)]) == EXIT_OK
        names = sorted(p.name for p in a.iterdir())
        assert names == sorted(p.name for p in b.iterdir())
        assert {"chemistry.json", "matrix.txt", "charpoly.json", "certification.json", "ratios.dat"} <= set(names)
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

import csv
import io
import json
import math

import pytest

from pattern_entropy.bounds import figure1_data
from pattern_entropy.cli import main, parse_pairs, round_sig, tokenize
from pattern_entropy.distributions import AnalysisConfig


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, data):
    p = tmp_path / name
    if isinstance(data, bytes):
        p.write_bytes(data)
    else:
        p.write_text(data, encoding="utf-8")
    return str(p)


class TestPattern:
    def test_lossless(self, capsys, caplog, tmp_path):
        code, out, _ = run(capsys, "pattern", write(tmp_path, "w.txt", "lossless"))
        assert code == 0
        assert out == "1 2 3 3 1 4 3 3\n"
        # the summary is a log record, kept off standard output
        assert '"m": 4' in caplog.text and '"n": 8' in caplog.text

    def test_bytes(self, capsys, tmp_path):
        code, out, _ = run(capsys, "pattern", "--tokenizer", "bytes", write(tmp_path, "a", b"aaa"))
        assert (code, out) == (0, "1 1 1\n")

    def test_multibyte_text(self, capsys, tmp_path):
        path = write(tmp_path, "u.txt", "héllo".encode("utf-8"))
        _, chars, _ = run(capsys, "pattern", path)
        _, raw, _ = run(capsys, "pattern", "--tokenizer", "bytes", path)
        assert chars == "1 2 3 3 4\n"
        assert raw == "1 2 3 4 4 5\n"

    def test_words(self, capsys, tmp_path):
        _, out, _ = run(capsys, "pattern", "--tokenizer", "words", write(tmp_path, "w", "to be or not　to be"))
        assert out == "1 2 3 4 1 2\n"

    def test_empty(self, capsys, tmp_path):
        code, _, err = run(capsys, "pattern", write(tmp_path, "e", ""))
        assert code == 1 and "empty" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "pattern", str(tmp_path / "nope"))
        assert code == 1 and "cannot read" in err


class TestEntropy:
    def test_exact(self, capsys):
        code, out, _ = run(capsys, "entropy", "--dist", "[0.5,0.5]", "--n", "2", "--method", "exact")
        obj = json.loads(out)
        assert code == 0 and obj["value_bits"] == 1.0 and obj["method"] == "exact_patterns"

    def test_monte_carlo_is_deterministic(self, capsys):
        argv = ("entropy", "--dist", "family:uniform,k=20", "--n", "50", "--method", "mc", "--samples", "2000", "--seed", "7")
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert first == second and json.loads(first)["samples"] == 2000

    def test_bell_refusal(self, capsys):
        code, out, err = run(capsys, "entropy", "--dist", "[0.5,0.5]", "--n", "20", "--method", "exact")
        assert code == 2 and out == "" and "Bell(20)" in err

    def test_csv(self, capsys):
        _, out, _ = run(capsys, "entropy", "--dist", "[0.5,0.5]", "--n", "2", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows[0]["value_bits"] == "1" and rows[0]["iid_total_bits"] == "2"

    def test_missing_n(self, capsys):
        code, _, err = run(capsys, "entropy", "--dist", "[0.5,0.5]")
        assert code == 1 and "--n" in err


class TestBounds:
    def test_large_uniform(self, capsys):
        code, out, _ = run(capsys, "bounds", "--dist", "family:uniform,k=1000", "--n", "1000000")
        rep = json.loads(out)
        assert code == 0
        assert all(b["applicable"] for b in rep["bounds"])

    def test_coin_csv(self, capsys):
        code, out, _ = run(capsys, "bounds", "--dist", "[0.5,0.5]", "--n", "100", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert list(rows[0]) == ["name", "value_bits", "applicable", "asymptotic", "decrease_bits", "clamped", "notes"]
        flags = {r["name"]: r["applicable"] for r in rows}
        assert flags["eq12_upper"] == flags["thm4_lower"] == flags["thm4_upper"] == "false"
        assert flags["thm1_lower"] == "true"


class TestRange:
    def test_matches_library(self, capsys):
        code, out, _ = run(capsys, "range", "--n", "1000000", "--k-min", "159", "--k-max", "1e6", "--steps", "30")
        lines = out.splitlines()
        assert code == 0 and lines[0] == "k,min_decrease_bits,max_decrease_bits"
        rows = figure1_data(AnalysisConfig(10**6, 0.1), 159, 1e6, 30)
        assert len(lines) == len(rows) + 1
        for line, (k, lo, hi) in zip(lines[1:], rows):
            a, b, c = line.split(",")
            assert int(a) == k
            assert float(b) == pytest.approx(lo, rel=1e-11) and float(c) == pytest.approx(hi, rel=1e-11)

    def test_below_threshold(self, capsys):
        code, out, err = run(capsys, "range", "--n", "1000000", "--k-min", "100", "--k-max", "1000")
        assert code == 1 and out == "" and "n^((1+eps)/3)" in err


class TestGrid:
    def test_json(self, capsys):
        code, out, _ = run(capsys, "grid", "--n", "100")
        obj = json.loads(out)
        assert code == 0 and set(obj) == {"eta", "xi"}


class TestCoding:
    def test_corpus_round_trip(self, capsys, tmp_path):
        corpus = write(tmp_path, "c.txt", "the quick brown fox jumps over the lazy dog " * 20)
        blob, dist, pairs, back = (str(tmp_path / f) for f in ("c.ptrn", "c.json", "c.pairs", "back.pairs"))
        code, out, err = run(capsys, "encode", corpus, "--out", blob, "--dist-out", dist, "--pairs-out", pairs)
        assert code == 0
        summary = json.loads(out)
        assert summary["actual_payload_bits"] <= summary["budget_bits"]
        assert {"ideal_bits", "overhead_bits", "symbols"} <= set(summary)
        code, _, _ = run(capsys, "decode", blob, "--dist", dist, "--out", back)
        assert code == 0
        assert (tmp_path / "back.pairs").read_text() == (tmp_path / "c.pairs").read_text()

    def test_pairs_file_reencodes_identically(self, capsys, tmp_path):
        corpus = write(tmp_path, "c.txt", "abracadabra")
        blob, dist, pairs, blob2 = (str(tmp_path / f) for f in ("a.ptrn", "a.json", "a.pairs", "b.ptrn"))
        run(capsys, "encode", corpus, "--out", blob, "--dist-out", dist, "--pairs-out", pairs)
        code, _, _ = run(capsys, "encode", pairs, "--pairs", "--dist", dist, "--n", "11", "--out", blob2)
        assert code == 0
        assert (tmp_path / "a.ptrn").read_bytes() == (tmp_path / "b.ptrn").read_bytes()

    def test_mismatched_dist(self, capsys, tmp_path):
        corpus = write(tmp_path, "c.txt", "abracadabra")
        blob, dist = str(tmp_path / "a.ptrn"), str(tmp_path / "a.json")
        run(capsys, "encode", corpus, "--out", blob, "--dist-out", dist)
        code, out, err = run(capsys, "decode", blob, "--dist", "[0.1,0.15,0.2,0.25,0.3]")
        assert code != 0 and out == "" and "digest" in err

    def test_corrupt_blob(self, capsys, tmp_path):
        corpus = write(tmp_path, "c.txt", "mississippi river")
        blob, dist = tmp_path / "m.ptrn", str(tmp_path / "m.json")
        run(capsys, "encode", corpus, "--out", str(blob), "--dist-out", dist)
        data = bytearray(blob.read_bytes())
        data[-1] ^= 0xFF
        blob.write_bytes(bytes(data))
        code, _, err = run(capsys, "decode", str(blob), "--dist", dist)
        assert code == 1 and "CorruptPayloadError" in err

    def test_encode_needs_out(self, capsys, tmp_path):
        code, _, err = run(capsys, "encode", write(tmp_path, "c", "abc"))
        assert code == 1 and "--out" in err


class TestVerify:
    @pytest.mark.parametrize("suite", ["patterns", "figure1"])
    def test_quick_suites(self, capsys, suite):
        code, out, _ = run(capsys, "verify", suite)
        obj = json.loads(out)
        assert code == 0 and obj["passed"] and obj["suite"] == suite


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["entropy", "--n", "two"])
    assert exc.value.code == 1


def test_unknown_command(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_twelve_significant_digits():
    assert round_sig({"a": [math.pi, 1]}) == {"a": [3.14159265359, 1]}


def test_tokenizers():
    assert tokenize(b"a b\n", "bytes") == [97, 32, 98, 10]
    assert tokenize(b"a b\n", "words") == ["a", "b"]
    assert tokenize("é".encode(), "chars") == ["é"]


def test_parse_pairs():
    assert parse_pairs("1 2 1\n3 3 3\n") == ([1, 2, 1], [3, 3, 3])

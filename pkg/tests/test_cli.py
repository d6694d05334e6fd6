import json
import os
import re
import subprocess
import sys

import pytest

from lgcluster.cli import UsageError, parse_sequence, resolve_prime, run, seed_from_json
from lgcluster.exactalg import DEFAULT_PRIME, LaurentPoly
from lgcluster.lgseed import SurfaceId, initial_seed, iterate

DOT_LINE = re.compile(r'^\s*(\d+;|\d+ -> \d+ \[label=\d+\];)$')


def ok(*argv):
    out, err, code = run(list(argv))
    assert code == 0, err
    return out


def assert_valid_dot(text):
    lines = text.strip().splitlines()
    assert re.match(r"^digraph \w+ \{$", lines[0])
    assert lines[-1] == "}"
    assert all(DOT_LINE.match(line) for line in lines[1:-1])


def test_parse_sequence():
    assert parse_sequence("1,3,2") == (0, 2, 1)
    assert parse_sequence("") == ()
    assert parse_sequence(None) is None
    for bad in ("0", "1,x", "-2"):
        with pytest.raises(UsageError):
            parse_sequence(bad)


def test_prime_precedence():
    env = {"LGCLUSTER_PRIME": "101"}
    assert resolve_prime(None, {}) == DEFAULT_PRIME
    assert resolve_prime(None, env) == 101
    assert resolve_prime(103, env) == 103
    with pytest.raises(UsageError):
        resolve_prime(None, {"LGCLUSTER_PRIME": "100"})
    with pytest.raises(UsageError):
        resolve_prime(None, {"LGCLUSTER_PRIME": "seven"})


def test_env_prime_reaches_reports(monkeypatch):
    monkeypatch.setenv("LGCLUSTER_PRIME", "1000003")
    data = json.loads(ok("verify", "main", "-s", "cp2", "-q", "1", "--mode", "modp", "--json"))
    assert data[0]["mode"]["modp"]["prime"] == 1000003
    data = json.loads(ok("verify", "main", "-s", "cp2", "-q", "1", "--mode", "modp",
                         "--prime", "101", "--json"))
    assert data[0]["mode"]["modp"]["prime"] == 101


def test_seeds_list_text_and_json():
    text = ok("seeds", "list")
    for s in SurfaceId:
        assert f"surface: {s.value}" in text
    data = json.loads(ok("seeds", "list", "--json"))
    assert [d["surface"] for d in data] == [s.value for s in SurfaceId]
    for d in data:
        surface, seq, seed = seed_from_json(d)
        assert seq == () and seed == initial_seed(surface)


def test_seeds_list_dot():
    out = ok("seeds", "list", "-s", "bl3", "--format", "dot")
    assert_valid_dot(out)
    assert out.count("->") == 12


def test_mutate_example():
    out = ok("mutate", "-s", "cp2", "-q", "1")
    assert "potential: z1^-1*z2^-1 + 2*z2^-2 + z2 + z1*z2^-3" in out
    assert "directions: (-1,-1) (-2,1) (4,1)" in out


def test_mutate_json_round_trip():
    data = json.loads(ok("mutate", "-s", "Bl2CP2", "-q", "5,2,1", "--json"))
    surface, seq, seed = seed_from_json(data)
    assert surface is SurfaceId.Bl2CP2 and seq == (4, 1, 0)
    assert seed == iterate(initial_seed(surface), seq)
    assert data["sequence"] == [5, 2, 1]


def test_mutate_dot():
    assert_valid_dot(ok("mutate", "-s", "cp2", "-q", "1", "--format", "dot"))


def test_cache_hit_is_byte_identical(tmp_path):
    argv = ["mutate", "-s", "bl1", "-q", "2,4,1", "--json", "--cache-dir", str(tmp_path)]
    cold = ok(*argv)
    files = list(tmp_path.iterdir())
    assert [f.name for f in files] == ["Bl1CP2_2-4-1.json"]
    warm = ok(*argv)
    assert warm == cold
    assert ok("mutate", "-s", "bl1", "-q", "2,4,1", "--json") == cold
    for fmt in ("text", "dot"):
        assert ok("mutate", "-s", "bl1", "-q", "2,4,1", "--format", fmt,
                  "--cache-dir", str(tmp_path)) == \
            ok("mutate", "-s", "bl1", "-q", "2,4,1", "--format", fmt)


def test_corrupt_cache_is_recomputed(tmp_path):
    (tmp_path / "CP2_1.json").write_text("{not json")
    out = ok("mutate", "-s", "cp2", "-q", "1", "--json", "--cache-dir", str(tmp_path))
    assert out == ok("mutate", "-s", "cp2", "-q", "1", "--json")
    assert json.loads((tmp_path / "CP2_1.json").read_text()) == json.loads(out)


def test_usage_errors_exit_2():
    assert run(["mutate", "-s", "cp2", "-q", "1,1"])[2] == 2
    assert run(["mutate", "-s", "Bl9", "-q", "1"])[2] == 2
    assert run(["mutate", "-s", "cp2", "-q", "4"])[2] == 2
    assert run(["mutate", "-q", "1"])[2] == 2
    assert run(["markov", "--depth", "-1"])[2] == 2
    assert run(["frobnicate"])[2] == 2
    assert run(["verify", "main", "-s", "cp2", "--mode", "modp", "--prime", "100"])[2] == 2
    out, err, code = run(["mutate", "-s", "cp2", "-q", "2,2"])
    assert code == 2 and "repeats" in err


def test_allow_repeats():
    out = ok("mutate", "-s", "cp2", "-q", "1,1", "--allow-repeats")
    assert "directions: (1,1) (-5,-2) (4,1)" in out


def test_verify_all_cp2():
    out = ok("verify", "all", "-s", "cp2")
    assert out.rstrip().endswith("23/23 checks passed")
    data = json.loads(ok("verify", "all", "-s", "cp2", "--json"))
    checks = [r["check"] for r in data]
    assert checks == sorted(checks, key=["initial", "bmat", "compat", "main"].index)
    assert all(r["outcome"] == "pass" for r in data)


def test_verify_modes_agree():
    exact = json.loads(ok("verify", "main", "-s", "CP1xCP1", "--json"))
    modp = json.loads(ok("verify", "main", "-s", "CP1xCP1", "--mode", "modp", "--json"))
    assert [(r["sequence"], r["outcome"]) for r in exact] == \
        [(r["sequence"], r["outcome"]) for r in modp]
    assert len(exact) == 65


def test_verify_compat_vectors_flag():
    data = json.loads(ok("verify", "compat", "-s", "bl1", "-q", "2", "--vectors", "7", "--json"))
    assert len(data) == 3
    assert all(r["details"]["vectors"] == 7 and r["sequence"][0] == 2 for r in data)


def test_markov_output():
    out = ok("markov", "--depth", "3")
    assert "(2, 5, 29)  depth 3" in out
    data = json.loads(ok("markov", "--depth", "2", "--json"))
    assert {tuple(d["triple"]) for d in data} == {(1, 1, 1), (1, 1, 2), (1, 2, 5)}


def test_export(tmp_path):
    dest = tmp_path / "q.dot"
    assert ok("export", "quiver", "-s", "bl2", "-o", str(dest)) == ""
    assert_valid_dot(dest.read_text())
    rows = json.loads(ok("export", "bmatrix", "-s", "cp2", "-q", "1", "--json"))
    assert rows == [[0, -3, 3], [3, 0, -6], [-3, 6, 0]]
    fp = json.loads(ok("export", "fpoly", "-s", "cp2", "--json"))
    assert LaurentPoly.from_json(fp["f_poly"]) == LaurentPoly.parse("1 + u2 + u2*u3", 3, "u")
    assert run(["export", "fpoly", "-s", "cp2", "-q", "1"])[2] == 2
    assert ok("export", "seed", "-s", "cp2", "--json") == ok("mutate", "-s", "cp2", "--json")


def test_module_entry_point():
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "lgcluster", "mutate", "-s", "cp2", "-q", "1,1"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 2 and "error" in proc.stderr
    proc = subprocess.run([sys.executable, "-m", "lgcluster", "seeds", "list", "--json"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0 and len(json.loads(proc.stdout)) == 5

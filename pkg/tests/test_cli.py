import json

import pytest

from wsbfs.cli import main, parse_sources
from wsbfs.graph import build_csr, generate_erdos_renyi, load_edge_list, serial_bfs


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def path_file(tmp_path):
    return write(tmp_path / "path.txt", "0 1\n1 2\n2 3\n")


def test_gen_er_line_count(tmp_path, capsys):
    out = tmp_path / "er.txt"
    assert main(["gen", "er", "--n", "1000", "--m", "5000", "--seed", "1", "--out", str(out)]) == 0
    data = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert len(data) == 5000
    assert "n=1000 m=5000" in capsys.readouterr().out


def test_gen_rmat_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert main(["gen", "rmat", "--scale", "4", "--ef", "8", "--seed", "9", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_empty_graph(tmp_path):
    out = tmp_path / "e.txt"
    assert main(["gen", "er", "--n", "1", "--m", "0", "--out", str(out)]) == 0
    with open(out) as fh:
        edges, n = load_edge_list(fh)
    assert len(edges) == 0


def test_bfs_path_summary(path_file, capsys):
    assert main(["bfs", path_file, "--source", "0", "-P", "4"]) == 0
    out = capsys.readouterr().out
    assert "reachable=4 max_level=3" in out


def test_bfs_component_and_variants(tmp_path, capsys):
    f = write(tmp_path / "g.txt", "0 1\n1 2\n3 4\n4 5\n5 6\n")
    main(["bfs", f, "--source", "4", "-P", "2"])
    sens = capsys.readouterr().out.splitlines()[0]
    main(["bfs", f, "--source", "4", "-P", "2", "--variant", "insensitive"])
    ins = capsys.readouterr().out.splitlines()[0]
    assert "reachable=4 max_level=2" in sens
    strip = lambda s: s.rsplit(" time_s=", 1)[0]  # noqa: E731
    assert strip(sens) == strip(ins)


def test_bfs_outputs(path_file, tmp_path, capsys):
    assert main(["bfs", path_file, "--output", "csv", "-P", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("run_id,source,variant,level,step")
    assert len(lines) == 1 + 4 * 7
    assert main(["bfs", path_file, "--output", "json", "-P", "2", "--source", "random:3:1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["bound_reports"]) == 3
    dump = tmp_path / "d.txt"
    assert main(["bfs", path_file, "--source", "3", "--dump", str(dump)]) == 0
    assert dump.read_text().splitlines() == ["0 3", "1 2", "2 1", "3 0"]


def test_bfs_directed_unreached_dump(path_file, tmp_path):
    dump = tmp_path / "d.txt"
    assert main(["bfs", path_file, "--source", "2", "--directed", "--dump", str(dump)]) == 0
    assert dump.read_text().splitlines() == ["0 -1", "1 -1", "2 0", "3 1"]


def test_bfs_errors(path_file, tmp_path, capsys):
    assert main(["bfs", path_file, "--source", "9"]) == 2
    assert main(["bfs", str(tmp_path / "missing.txt")]) == 2
    bad = write(tmp_path / "bad.txt", "0 1\n1 z\n")
    assert main(["bfs", bad]) == 2
    assert "line 2" in capsys.readouterr().err


def test_verify_pass_and_fail(tmp_path, capsys):
    edges = generate_erdos_renyi(300, 700, 4)
    f = tmp_path / "er.txt"
    f.write_text("".join(f"{u} {v}\n" for u, v in edges.tolist()))
    assert main(["verify", str(f), "--sources", "20", "--workers", "1,2,4,8"]) == 0
    assert "PASS: 160/160" in capsys.readouterr().out
    assert main(["verify", str(f), "--sources", "2", "--workers", "2", "--corrupt-vertex", "5"]) == 1
    out = capsys.readouterr().out
    assert "vertex 5" in out and out.strip().endswith("runs match serial BFS")


def test_verify_empty_graph(tmp_path, capsys):
    f = write(tmp_path / "empty.txt", "# nothing\n")
    assert main(["verify", f]) == 0
    assert "no vertices" in capsys.readouterr().out


def test_bench_row_count(tmp_path, capsys):
    edges = generate_erdos_renyi(2000, 8000, 5)
    f = tmp_path / "er.txt"
    f.write_text("".join(f"{u} {v}\n" for u, v in edges.tolist()))
    csv_path, json_path, bcsv = tmp_path / "t.csv", tmp_path / "a.json", tmp_path / "b.csv"
    assert main(["bench", str(f), "--sources", "4", "--reps", "3", "-P", "4", "--sweep", "1,2",
                 "--csv", str(csv_path), "--json", str(json_path),
                 "--bound-csv", str(bcsv)]) == 0
    rows = csv_path.read_text().splitlines()[1:]
    runs = {(r.split(",")[0], r.split(",")[2]) for r in rows}
    assert len(runs) == 4 * 3 * 2
    doc = json.loads(json_path.read_text())
    assert set(doc["speedup_sweep"]) == {"1", "2"}
    assert len(bcsv.read_text().splitlines()) == 1 + 4 * 3
    out = capsys.readouterr().out
    assert "core_ratio" in out


def test_parse_sources():
    assert parse_sources("5", 10) == [5]
    got = parse_sources("random:4:7", 10)
    assert len(got) == 4 and got == parse_sources("random:4:7", 10)
    assert all(0 <= s < 10 for s in got)
    with pytest.raises(ValueError):
        parse_sources("random:x", 10)


def test_matrix_market_input(tmp_path, capsys):
    f = write(tmp_path / "g.mtx",
              "%%MatrixMarket matrix coordinate pattern general\n4 4 3\n1 2\n2 3\n3 4\n")
    assert main(["bfs", f, "--source", "0"]) == 0
    assert "reachable=4 max_level=3" in capsys.readouterr().out

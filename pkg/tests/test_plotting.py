import math

from stitchgen.evolve import GenerationStats
from stitchgen.plotting import write_run_figures


def stats(n, nan_until=0):
    out = []
    for g in range(n):
        f = math.nan if g < nan_until else 0.5 + g / (2 * n)
        out.append(GenerationStats(g, f, f, 1.0, 0.8, 10 + g, 20.0, 5.0, 0 if g < nan_until else 3))
    return out


def test_figures_written_and_deterministic(tmp_path):
    runs = {"run 0": stats(6, nan_until=2), "run 1": stats(6)}
    sizes = {"run 0": 40, "run 1": 40}
    a = write_run_figures(runs, sizes, tmp_path / "a")
    b = write_run_figures(runs, sizes, tmp_path / "b")
    assert [p.name for p in a] == ["fitness.png", "mechanics.png", "lengths.png"]
    for pa, pb in zip(a, b):
        data = pa.read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n" and data == pb.read_bytes()


def test_all_nan_run_still_plots(tmp_path):
    paths = write_run_figures({"r": stats(3, nan_until=3)}, {}, tmp_path)
    assert all(p.stat().st_size > 0 for p in paths)

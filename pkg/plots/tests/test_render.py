import subprocess
import sys

import pytest

from netgames_plots import EmptyDataError, PlotJob, SchemaError, render
from netgames_plots.cli import main

SUMMARY_HEADER = "experiment,family,N,metric,mean,std,count\n"
ROWS_HEADER = "experiment,family,N,trial,seed,metric,value\n"


@pytest.fixture
def fig2_summary(tmp_path):
    lines = [SUMMARY_HEADER]
    for family in ("complete_errors", "star_erased"):
        for n in (10, 50, 200):
            lines.append(f"fig2,{family},{n},asym_inf,{2.0 / n},0.0,4\n")
            lines.append(f"fig2,{family},{n},norm2,{float(n)},0.1,4\n")
            lines.append(f"fig2,{family},{n},norm_inf,{1.5 * n},0.2,4\n")
    path = tmp_path / "summary.csv"
    path.write_text("".join(lines))
    return path


@pytest.fixture
def fig3_summary(tmp_path):
    lines = [SUMMARY_HEADER]
    for family in ("er_sparse", "er_dense"):
        for n in (5, 10, 20):
            lines.append(f"fig3,{family},{n},pos_lambda,{1 + 2 / n},0.0,4\n")
            lines.append(f"fig3,{family},{n},pos_G,{2 + 2 / n},0.0,4\n")
            lines.append(f"fig3,{family},{n},pos_gamma,13.5,0.0,4\n")
    path = tmp_path / "summary.csv"
    path.write_text("".join(lines))
    return path


@pytest.fixture
def fig4_rows(tmp_path):
    lines = [ROWS_HEADER]
    for alg in ("br", "gp"):
        for trial in (0, 1):
            for k in range(40):
                lines.append(f"fig4,{alg},20,{trial},{trial},phi[{k}],{k * 0.5}\n")
    path = tmp_path / "rows.csv"
    path.write_text("".join(lines))
    return path


def test_fig2_renders(tmp_path, fig2_summary):
    out = tmp_path / "fig2.png"
    render(PlotJob(figure="fig2", out_path=str(out), summary_path=str(fig2_summary)))
    assert out.exists() and out.stat().st_size > 0


def test_fig3_renders(tmp_path, fig3_summary):
    out = tmp_path / "fig3.png"
    render(PlotJob(figure="fig3", out_path=str(out), summary_path=str(fig3_summary)))
    assert out.exists() and out.stat().st_size > 0


def test_fig4_renders_monotone_trace(tmp_path, fig4_rows):
    out = tmp_path / "fig4.png"
    render(PlotJob(figure="fig4", out_path=str(out), rows_path=str(fig4_rows)))
    assert out.exists() and out.stat().st_size > 0


def test_rendering_is_byte_stable_and_read_only(tmp_path, fig2_summary):
    before = fig2_summary.read_bytes()
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    job_a = PlotJob(figure="fig2", out_path=str(a), summary_path=str(fig2_summary))
    job_b = PlotJob(figure="fig2", out_path=str(b), summary_path=str(fig2_summary))
    render(job_a)
    render(job_b)
    assert a.read_bytes() == b.read_bytes()
    assert fig2_summary.read_bytes() == before


def test_missing_columns_schema_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("experiment,family,N,mean\nfig2,x,10,1.0\n")
    with pytest.raises(SchemaError, match="metric"):
        render(PlotJob(figure="fig2", out_path=str(tmp_path / "x.png"),
                       summary_path=str(bad)))


def test_empty_data_error(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text(SUMMARY_HEADER)
    with pytest.raises(EmptyDataError):
        render(PlotJob(figure="fig2", out_path=str(tmp_path / "x.png"),
                       summary_path=str(empty)))


def test_fig4_requires_rows(tmp_path):
    with pytest.raises(SchemaError):
        PlotJob(figure="fig4", out_path=str(tmp_path / "x.png"),
                summary_path="whatever.csv")


def test_cli_render_and_exit_codes(tmp_path, fig2_summary, capsys):
    out = tmp_path / "cli.png"
    code = main(["render", "--fig", "fig2", "--summary", str(fig2_summary),
                 "--out", str(out)])
    assert code == 0
    assert out.exists()

    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    code = main(["render", "--fig", "fig2", "--summary", str(bad),
                 "--out", str(tmp_path / "no.png")])
    assert code == 1
    assert "schema error" in capsys.readouterr().err

    empty = tmp_path / "empty.csv"
    empty.write_text(SUMMARY_HEADER)
    code = main(["render", "--fig", "fig2", "--summary", str(empty),
                 "--out", str(tmp_path / "no2.png")])
    assert code == 2


def test_console_script_runs(tmp_path, fig4_rows):
    out = tmp_path / "fig4.png"
    result = subprocess.run(
        [sys.executable, "-m", "netgames_plots.cli", "render", "--fig", "fig4",
         "--rows", str(fig4_rows), "--out", str(out)],
        capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    assert out.exists()

from heckelab import cli


def run_text(command, extra=(), **kw):
    config = cli.RunConfig(extra=tuple(extra), **kw)
    return cli.run(command, config)


def test_reports_are_deterministic():
    for command, extra in [("verify-theta", ()), ("verify-eta", ()),
                           ("compute-space", ("S2", "2"))]:
        r1 = run_text(command, extra, seed=7, samples=20)
        r2 = run_text(command, extra, seed=7, samples=20)
        assert r1.to_text() == r2.to_text()


def test_seed_changes_draws_not_structure():
    r1 = run_text("verify-theta", seed=1, samples=20)
    r2 = run_text("verify-theta", seed=2, samples=20)
    assert [rec.name for rec in r1.records] == [rec.name for rec in r2.records]
    assert r1.ok and r2.ok


def test_all_suites_pass_at_small_samples():
    jobs = [
        ("verify-theta", ()),
        ("verify-eta", ()),
        ("verify-rational-tables", ()),
        ("verify-elliptic-tables", ()),
        ("verify-double-table", ()),
        ("compute-space", ("S2", "2")),
        ("compute-space", ("T2", "1")),
        ("check-conjecture", ("1",)),
        ("embed-check", ()),
    ]
    for command, extra in jobs:
        report = run_text(command, extra, samples=8)
        assert report.ok, f"{command} {extra}: {report.to_text()}"


def test_main_writes_file_and_exit_code(tmp_path):
    out = tmp_path / "report.txt"
    code = cli.main(["verify-theta", "--samples", "10", "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert text.startswith("suite: verify-theta")
    assert "result: ok" in text
    code2 = cli.main(["verify-theta", "--samples", "10", "--out", str(out)])
    assert out.read_text() == text
    assert code2 == 0


def test_main_rejects_bad_config(capsys):
    assert cli.main(["verify-theta", "--tau", "0.2,-1.0"]) == 2
    assert cli.main(["compute-space", "S2"]) == 2
    assert cli.main(["compute-space", "Q9", "2"]) == 2


def test_custom_tau_flows_through():
    report = run_text("verify-theta", tau=0.1 + 0.9j, samples=15)
    assert report.ok
    assert "1.000000000000e-01" in report.to_text().splitlines()[1]


def test_failure_sets_exit_code(tmp_path, monkeypatch):
    # An absurd tolerance override must flip asserted records to FAIL.
    code = cli.main(["verify-theta", "--samples", "10", "--tol", "1e-30",
                     "--out", str(tmp_path / "r.txt")])
    assert code == 1

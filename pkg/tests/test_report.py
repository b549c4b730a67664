from catiso.report import RunReport, aggregate, reports_to_csv


def sample_reports():
    return [
        RunReport("coc", "isolated", 0, 12, True, wall_time=0.5, seed=1),
        RunReport("coc", "fallback", 30, 4000, True, wall_time=2.0, seed=2),
        RunReport("s2d", "reject", 0, 1, True, wall_time=0.1, seed=3),
    ]


def test_json_round_trip():
    for report in sample_reports():
        again = RunReport.from_json(report.to_json())
        assert again == report
    fsat_report = RunReport("fsat", "isolated", 0, 900, True, round_queries=(880, 20))
    assert RunReport.from_json(fsat_report.to_json()) == fsat_report


def test_single_report_summary_echoes_it():
    report = sample_reports()[0]
    summary = aggregate([report])
    assert summary["count"] == 1
    assert summary["path_fractions"] == {"isolated": 1.0}
    assert summary["freed_bits"]["mean"] == report.freed_bits
    assert summary["oracle_queries"]["max"] == report.oracle_queries


def test_fractions_and_means():
    reports = sample_reports()
    summary = aggregate(reports)
    assert summary["count"] == 3
    for fraction in summary["path_fractions"].values():
        assert 0.0 <= fraction <= 1.0
    assert abs(sum(summary["path_fractions"].values()) - 1.0) < 1e-12
    assert summary["freed_bits"]["mean"] == (0 + 30 + 0) / 3
    assert summary["tape_restored_fraction"] == 1.0


def test_empty_aggregate():
    assert aggregate([]) == {"count": 0}


def test_csv_rows_carry_seed():
    text = reports_to_csv(sample_reports())
    lines = text.strip().splitlines()
    assert lines[0].startswith("schema_version,engine,path_taken")
    assert len(lines) == 4
    assert ",1" in lines[1] and ",2" in lines[2]

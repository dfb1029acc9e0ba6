"""Shared pytest wiring: a per-criterion summary for the acceptance tests."""

ACCEPTANCE_MODULE = "test_acceptance.py"

# (test function, printed title) in gate order
CRITERIA = [
    ("test_supervised_loss_matches_bruteforce_oracle", "supervised loss equals brute-force oracle (rel err 1e-10)"),
    ("test_target_matrix_matches_nested_loop_oracle", "target matrix equals nested-loop oracle; rows sum to 1"),
    ("test_gradients_match_finite_differences", "analytic gradients match central finite differences (rel err 1e-3)"),
    ("test_average_precision_oracle_and_chance_level", "average precision equals precision-walk oracle; chance level correct"),
    ("test_perturbation_postconditions", "perturbation post-conditions hold across 10,000 draws"),
    ("test_artifacts_are_byte_reproducible", "generation and training artifacts are byte-reproducible"),
    ("test_desk_scale_retrieval_quality", "desk-scale retrieval quality (mAP, noise/baseline columns, loss-mode margin)"),
    ("test_ablation_grid_runs_and_reports", "ablation grid: all 8 encoder/merge/attention combos run and report"),
]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if ACCEPTANCE_MODULE not in nodeid:
                continue
            name = nodeid.rsplit("::", 1)[-1]
            # a failed setup/teardown overrides an earlier pass for the same test
            if status in ("failed", "error") or name not in outcomes:
                outcomes[name] = status
    if not outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, title in CRITERIA:
        status = outcomes.get(name)
        if status == "passed":
            verdict, markup = "PASS", {"green": True}
        elif status is None:
            verdict, markup = "NOT RUN", {"yellow": True}
        elif status == "skipped":
            verdict, markup = "SKIP", {"yellow": True}
        else:
            verdict, markup = "FAIL", {"red": True}
        terminalreporter.write(f"{verdict:>7}", **markup)
        terminalreporter.write_line(f"  {title}")

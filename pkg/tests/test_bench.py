"""Benchmark harness: dataset fidelity, statistics, and end-to-end runs."""

import pytest

from nlteleop.bench import (
    BenchPolicy,
    CommandCase,
    DatasetError,
    compare,
    load_corpus,
    load_reference_table,
    records_report,
    reference_report,
    run_bench,
    summarize,
    write_report_file,
)
from nlteleop.core import Action, CommandIntent
from nlteleop.llm_gateway import MockServer, ProviderConfig

# Independent copies of the reference columns, typed straight from the
# source rows; the loader and summarize() must reproduce these.
GPT35_COLUMN = [1.05, 0.97, 0.91, 1.08, 0.77, 0.88, 0.61, 3.62, 1.03, 1.09,
                1.46, 0.72, 0.97, 0.72, 0.92, 0.83, 1.36, 0.88, 0.79, 1.27]
GPT4_COLUMN = [1.83, 1.71, 1.69, 1.26, 1.81, 1.75, 1.25, 1.98, 1.69, 1.99,
               1.93, 1.37, 1.67, 2.06, 1.49, 1.99, 2.02, 2.53, 1.57, 1.67]
ROSGPT_COLUMN = [1.15, 1.66, 1.19, 1.42, 1.45, 1.32, 1.27, 1.01, 1.31, 1.13,
                 1.46, 1.37, 1.61, 1.37, 1.29, 1.37, 1.26, 0.99, 1.03, 1.07]
ROSGPT_FAIL_ROWS = {7, 8, 10, 17, 18, 20}  # 1-based trial numbers


@pytest.fixture(scope="module")
def table():
    return load_reference_table()


@pytest.fixture(scope="module")
def corpus():
    return load_corpus()


class TestReferenceTable:
    def test_columns_match_independent_copy(self, table):
        assert list(table.gpt35) == GPT35_COLUMN
        assert list(table.gpt4) == GPT4_COLUMN
        assert list(table.rosgpt) == ROSGPT_COLUMN

    def test_success_flags(self, table):
        for i, ok in enumerate(table.rosgpt_success, start=1):
            assert ok == (i not in ROSGPT_FAIL_ROWS)
        assert all(table.gpt35_success)
        assert all(table.gpt4_success)

    def test_rosgpt_mean_exact(self, table):
        stats = summarize(table.rosgpt, table.rosgpt_success)
        assert stats.mean == 1.2865
        assert stats.successes == 14
        assert stats.count == 20

    def test_gpt4_mean(self, table):
        stats = summarize(table.gpt4, table.gpt4_success)
        assert stats.mean == pytest.approx(1.7630, abs=0.005)
        assert stats.successes == 20

    def test_gpt35_mean_documents_discrepancy(self, table):
        stats = summarize(table.gpt35, table.gpt35_success)
        # The mean of the 20 values is 1.0965; the source also prints a
        # summary of 1.18. Both must be visible, neither corrected.
        assert stats.mean == pytest.approx(1.0965, abs=0.0005)
        assert table.printed_means["gpt35"] == 1.18
        assert stats.mean != table.printed_means["gpt35"]

    def test_printed_summaries_preserved(self, table):
        assert table.printed_means == {"gpt35": 1.18, "gpt4": 1.76, "rosgpt": 1.28}
        assert table.printed_successes == {"gpt35": 20, "gpt4": 20, "rosgpt": 14}
        assert table.claimed_reduction_percent == 7.01

    def test_checksum_guard(self, monkeypatch):
        import nlteleop.bench as bench_mod

        monkeypatch.setattr(bench_mod, "REFERENCE_TABLE_SHA256", "0" * 64)
        with pytest.raises(DatasetError):
            load_reference_table()

    def test_column_lookup(self, table):
        assert table.column("rosgpt") == table.rosgpt
        with pytest.raises(KeyError):
            table.column("gpt5")

    def test_external_file_row_count_enforced(self, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("n\tgpt35_latency\n1\t1.0\n")
        with pytest.raises(DatasetError):
            load_reference_table(bad)


class TestStats:
    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            summarize([])

    def test_mean_rounded_to_4_decimals(self):
        stats = summarize([1.00005, 1.00005])
        assert stats.mean == round(1.00005, 4)

    def test_compare_identity_zero(self):
        stats = summarize([1.0, 1.0])
        report = compare(stats, stats)
        assert report.percent_reduction == 0.0
        assert report.delta == 0.0

    def test_compare_column_means(self):
        a = summarize(GPT35_COLUMN)
        b = summarize(ROSGPT_COLUMN)
        report = compare(a, b)
        assert report.percent_reduction == pytest.approx(14.77, abs=0.05)

    def test_compare_quoted_means(self):
        a = summarize([1.1804])
        b = summarize([1.2865])
        assert compare(a, b).percent_reduction == pytest.approx(8.25, abs=0.05)

    def test_compare_antisymmetric_sign(self):
        fast = summarize([1.0])
        slow = summarize([2.0])
        assert compare(fast, slow).percent_reduction > 0
        assert compare(slow, fast).percent_reduction < 0

    def test_zero_baseline_rejected(self):
        with pytest.raises(ValueError):
            compare(summarize([1.0]), summarize([0.0]))


class TestCorpus:
    def test_twenty_valid_cases(self, corpus):
        assert len(corpus) == 20
        assert len({c.id for c in corpus}) == 20
        for case in corpus:
            assert case.expected.speed > 0

    def test_covers_baseline_failure_modes(self, corpus):
        text = " ".join(c.transcript for c in corpus)
        assert "centimeters" in text
        assert "kilometers per hour" in text
        assert "right" in text
        assert "left" in text

    def test_covers_both_actions_and_signs(self, corpus):
        moves = [c for c in corpus if c.expected.action is Action.MOVE]
        rotates = [c for c in corpus if c.expected.action is Action.ROTATE]
        assert moves and rotates
        assert any(c.expected.magnitude < 0 for c in moves)
        assert any(c.expected.magnitude < 0 for c in rotates)


class TestRunBench:
    def test_corpus_succeeds_against_mock(self, corpus):
        with MockServer() as server:
            config = ProviderConfig(base_url=server.base_url, model="mock")
            records = run_bench(corpus, config)
        assert len(records) == 20
        assert all(r.success for r in records)
        assert [r.command for r in records] == [c.transcript for c in corpus]
        assert all(r.latency >= 0 for r in records)

    def test_failing_case_is_isolated(self, corpus):
        cases = list(corpus[:3]) + [
            CommandCase("bad", "flurble the quazzle", CommandIntent(Action.MOVE, 1, 0.2))
        ]
        with MockServer() as server:
            config = ProviderConfig(base_url=server.base_url, model="mock")
            records = run_bench(cases, config)
        assert [r.success for r in records] == [True, True, True, False]
        assert records[3].error is not None

    def test_mismatched_expectation_fails(self):
        cases = [
            CommandCase(
                "m", "move forward 2 meters at 0.5 meters per second",
                CommandIntent(Action.MOVE, 3.0, 0.5),
            )
        ]
        with MockServer() as server:
            config = ProviderConfig(base_url=server.base_url, model="mock")
            records = run_bench(cases, config)
        assert records[0].success is False
        assert records[0].intent is not None  # parsed fine, just wrong

    def test_determinism(self, corpus):
        with MockServer() as server:
            config = ProviderConfig(base_url=server.base_url, model="mock")
            first = [r.success for r in run_bench(corpus, config)]
            second = [r.success for r in run_bench(corpus, config)]
        assert first == second

    def test_provider_failure_recorded_not_raised(self, corpus):
        config = ProviderConfig(base_url="http://127.0.0.1:1", model="x", timeout=0.5)
        records = run_bench(corpus[:2], config)
        assert [r.success for r in records] == [False, False]
        assert all(r.error for r in records)

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            BenchPolicy(retries=-1)


class TestReports:
    def test_reference_report_flags_discrepancies(self):
        report = reference_report()
        assert "1.0965" in report
        assert "1.18" in report
        assert "7.01" in report
        assert "14.77" in report
        assert "8.25" in report
        assert "14/20" in report

    def test_records_report_and_file(self, tmp_path, corpus):
        with MockServer() as server:
            config = ProviderConfig(base_url=server.base_url, model="mock")
            records = run_bench(corpus[:5], config)
        text = records_report(records)
        assert "successes 5" in text
        out = tmp_path / "report.tsv"
        write_report_file(records, out)
        content = out.read_text()
        assert "# successes=5" in content
        assert len([l for l in content.splitlines() if not l.startswith("#")]) == 6

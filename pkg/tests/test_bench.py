import pytest

from credfield.bench import (
    BenchConfig,
    Protocol,
    baseline_derive,
    baseline_store,
    baseline_verify,
    format_table,
    run_bench,
    run_comparison,
)
from credfield.core import KdfParams


class TestBaseline:
    def test_roundtrip(self):
        digest = baseline_derive("secret")
        stored = baseline_store(digest, "alice")
        assert baseline_verify(digest, "alice", stored)

    def test_wrong_password_fails(self):
        stored = baseline_store(baseline_derive("secret"), "alice")
        assert not baseline_verify(baseline_derive("other"), "alice", stored)

    def test_salt_is_user_id(self):
        digest = baseline_derive("secret")
        assert baseline_store(digest, "alice") != baseline_store(digest, "bob")

    def test_sha256_empty_known_constant(self):
        assert baseline_derive("").hex() == (
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        )


class TestRunBench:
    def test_n_1_arithmetic_identity(self):
        report = run_bench(BenchConfig(n=1, protocol=Protocol.PROPOSED))
        assert report.per_auth_ms == pytest.approx(report.total_seconds * 1000.0)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            BenchConfig(n=0)

    def test_proposed_small_run(self):
        report = run_bench(BenchConfig(n=20))
        assert report.protocol is Protocol.PROPOSED
        assert report.total_seconds > 0
        assert report.transmission_bytes == 244
        assert report.storage_bytes <= 2048
        assert report.paper_total_seconds == 33.92

    def test_hashed_small_run(self):
        report = run_bench(BenchConfig(n=20, protocol=Protocol.HASHED_PASSWORD))
        assert report.protocol is Protocol.HASHED_PASSWORD
        assert report.paper_total_seconds == 12.99

    def test_per_auth_relation(self):
        report = run_bench(BenchConfig(n=10, protocol=Protocol.HASHED_PASSWORD))
        assert report.per_auth_ms == pytest.approx(
            report.total_seconds * 1000.0 / report.n
        )

    def test_kdf_config_respected(self):
        fast = run_bench(BenchConfig(n=5, protocol=Protocol.HASHED_PASSWORD,
                                     kdf=KdfParams(iterations=1)))
        assert fast.total_seconds >= 0


class TestComparison:
    def test_comparison_shape_and_table(self):
        comparison = run_comparison(n=10)
        assert comparison["paper_time_ratio"] == pytest.approx(33.92 / 12.99, rel=1e-3)
        assert comparison["time_ratio"] > 0
        assert comparison["proposed"]["transmission_bytes"] == 244
        table = format_table(comparison)
        assert "33.92" in table and "12.99" in table
        assert "401" in table and "2048" in table

    def test_sizes_match_wire_report(self):
        from credfield.wire import measure_sizes

        report = run_bench(BenchConfig(n=1))
        sizes = measure_sizes()
        assert report.transmission_bytes == sizes.transmission_bytes
        assert report.storage_bytes == sizes.storage_bytes_per_user

import json

import pytest

from app.schemas.report_models import CheckVerdict, Mutation
from app.services.exceptions import BudgetExceededError, PreconditionError
from app.services.text_codec import text_codec
from app.services.verify_service import verify_service


def test_m2_chain_passes():
    report = verify_service.check_m2_chain()
    assert report.passed, report.counterexample
    # 三步成员证书加一份复合证书
    assert len(report.certificates) == 4


def test_m2_chain_certificates_parse():
    report = verify_service.check_m2_chain()
    for certificate in report.certificates:
        assert text_codec.parse_certificates(certificate)


def test_images_of_r_passes():
    report = verify_service.check_images_of_R()
    assert report.passed, report.counterexample


def test_claim_calfg_two():
    report = verify_service.check_claim_calfg(2)
    assert report.passed, report.counterexample
    assert "64/64 对一致" in report.notes


@pytest.mark.slow
def test_claim_calfg_three():
    report = verify_service.check_claim_calfg(3)
    assert report.passed, report.counterexample
    assert any("m=3" in note for note in report.notes)


def test_unique_cover_two():
    report = verify_service.check_unique_cover(2)
    assert report.passed, report.counterexample
    assert report.certificates == ["reduced 3\nset 1,2\nset 1,3\nset 2,3\n"]


@pytest.mark.slow
def test_unique_cover_three():
    report = verify_service.check_unique_cover(3)
    assert report.passed, report.counterexample


def test_lemma_mplus1_small():
    report = verify_service.check_lemma_mplus1(n_max=3, m_max=2)
    assert report.passed, report.counterexample


def test_duality_small():
    report = verify_service.check_duality(n_max=4, arrow_n_max=3)
    assert report.passed, report.counterexample


def test_corrupt_star_is_caught():
    report = verify_service.check_lemma_mplus1(n_max=3, m_max=1, mutation=Mutation.CORRUPT_STAR)
    assert report.verdict == CheckVerdict.FAIL
    assert report.counterexample.startswith("m=1")


def test_dropped_maxima_check_is_caught():
    report = verify_service.check_duality(n_max=3, arrow_n_max=2, mutation=Mutation.DROP_MAXIMA_CHECK)
    assert report.verdict == CheckVerdict.FAIL
    assert "满射存在=True" in report.counterexample


def test_skipped_family_is_caught():
    report = verify_service.check_unique_cover(2, mutation=Mutation.SKIP_FAMILY)
    assert report.verdict == CheckVerdict.FAIL


def test_unsupported_mutation():
    with pytest.raises(PreconditionError):
        verify_service.check_duality(n_max=2, arrow_n_max=2, mutation=Mutation.CORRUPT_STAR)
    with pytest.raises(PreconditionError):
        verify_service.check_lemma_mplus1(n_max=2, m_max=1, mutation=Mutation.SKIP_FAMILY)


def test_verify_budgets():
    with pytest.raises(BudgetExceededError):
        verify_service.check_lemma_mplus1(n_max=7)
    with pytest.raises(BudgetExceededError):
        verify_service.check_duality(n_max=3, arrow_n_max=6)
    with pytest.raises(BudgetExceededError):
        verify_service.check_unique_cover(4)
    with pytest.raises(PreconditionError):
        verify_service.check_unique_cover(1)


def test_parallel_matches_serial():
    serial = verify_service.check_lemma_mplus1(n_max=3, m_max=2, jobs=1)
    parallel = verify_service.check_lemma_mplus1(n_max=3, m_max=2, jobs=2)
    assert serial.verdict == parallel.verdict
    assert serial.notes == parallel.notes


def test_export(tmp_path):
    reports = [verify_service.check_m2_chain(), verify_service.check_claim_calfg(2)]
    report_path = tmp_path / "verify.jsonl"
    cert_dir = tmp_path / "certs"
    verify_service.export(reports, report_path, cert_dir)

    lines = report_path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    first = json.loads(lines[0])
    assert first["name"] == "m2-chain"
    assert first["verdict"] == "pass"
    assert "certificates" not in first
    assert len(first["certificate_paths"]) == 4
    assert (cert_dir / "m2-chain-0.cert").exists()
    assert json.loads(lines[1])["certificate_paths"] == []

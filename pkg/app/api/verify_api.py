from enum import Enum
from pathlib import Path
from typing import Optional

import typer
from loguru import logger

from config.settings import settings
from app.api.common import OutputFormat, cli_state, emit, finish, handle_errors
from app.schemas.report_models import Mutation
from app.services.verify_service import verify_service

router = typer.Typer(help="验证")


class CheckName(str, Enum):
    ALL = "all"
    LEMMA_MPLUS1 = "lemma-mplus1"
    M2_CHAIN = "m2-chain"
    UNIQUE_COVER = "unique-cover"
    IMAGES_R = "images-r"
    DUALITY = "duality"
    CLAIM_CALFG = "claim-calfg"


@router.command("verify")
@handle_errors
def verify(
    name: CheckName = typer.Argument(..., help="检查名称"),
    m: int = typer.Option(2, "--m", help="unique-cover / claim-calfg 的 m"),
    n_max: Optional[int] = typer.Option(None, "--n-max", help="偏序集规模上限"),
    m_max: int = typer.Option(2, "--m-max", help="lemma-mplus1 的 m 上限"),
    arrow_n_max: Optional[int] = typer.Option(None, "--arrow-n-max", help="duality 箭头检查的规模上限"),
    mutation: Mutation = typer.Option(Mutation.NONE, "--mutation", help="注入的故障"),
    report: Optional[Path] = typer.Option(None, "--report", help="报告写入文件 (每项检查一行 JSON)"),
    cert_dir: Optional[Path] = typer.Option(None, "--cert-dir", help="证书写入目录"),
):
    """
    运行验证, 全部通过时退出码为 0
    """
    logger.info(f"CLI调用: verify {name.value}, mutation: {mutation.value}")
    jobs = cli_state.jobs
    if name == CheckName.ALL:
        reports = verify_service.check_all(mutation, jobs)
    elif name == CheckName.LEMMA_MPLUS1:
        reports = [verify_service.check_lemma_mplus1(n_max or settings.VERIFY_N_MAX, m_max, mutation, jobs)]
    elif name == CheckName.M2_CHAIN:
        reports = [verify_service.check_m2_chain()]
    elif name == CheckName.UNIQUE_COVER:
        reports = [verify_service.check_unique_cover(m, mutation, jobs)]
    elif name == CheckName.IMAGES_R:
        reports = [verify_service.check_images_of_R()]
    elif name == CheckName.DUALITY:
        reports = [verify_service.check_duality(n_max or 5, arrow_n_max, mutation, jobs)]
    else:
        reports = [verify_service.check_claim_calfg(m)]

    verify_service.export(reports, report, cert_dir)
    passed = all(r.passed for r in reports)
    if cli_state.format == OutputFormat.RECORDS:
        for r in reports:
            emit("verify", r.passed, f"{r.name}: {r.verdict.value}",
                 data=r.model_dump(mode="json", exclude={"certificates"}))
        finish(0 if passed else 1)

    lines = []
    for r in reports:
        lines.append(f"[{r.verdict.value.upper()}] {r.name} {r.params} ({r.wall_time:.2f}s)")
        lines += [f"    {note}" for note in r.notes]
        if r.counterexample:
            lines += [f"    反例: {line}" for line in r.counterexample.splitlines()]
        if r.certificate_paths:
            lines += [f"    证书: {path}" for path in r.certificate_paths]
    summary = f"{sum(r.passed for r in reports)}/{len(reports)} 项检查通过"
    finish(emit("verify", passed, summary, text="\n".join(lines)))

from pathlib import Path
from typing import List, Optional

import typer
from loguru import logger

from app.api.common import emit, finish, handle_errors, load_poset, write_or_none
from app.services.quasivar_service import quasivar_service, subset_label
from app.services.text_codec import text_codec

router = typer.Typer(help="拟簇")


def _load_reduced(path: Path):
    base, family = text_codec.parse_reduced(text_codec.read_text(path))
    return quasivar_service.make_reduced(base, family)


@router.command("member")
@handle_errors
def member(
    target: Path = typer.Option(..., "--target", help="目标偏序集 X"),
    gen: List[Path] = typer.Option(..., "--gen", help="生成元, 可重复"),
    cert: Optional[Path] = typer.Option(None, "--cert", help="证书写入文件"),
):
    """
    判定 ε(X) 是否属于生成元生成的拟簇
    """
    logger.info(f"CLI调用: member, target: {target}, gen: {gen}")
    x = load_poset(target)
    gens = [load_poset(path) for path in gen]
    certificate = quasivar_service.member(x, gens)
    if certificate.is_member:
        text = text_codec.dump_certificates(certificate.witnesses, certificate.sources)
        write_or_none(cert, text)
        finish(emit("member", True, f"member: {len(certificate.witnesses)} 个见证", text=text,
                    data={"maps": [list(f.map) for f in certificate.witnesses],
                          "sources": list(certificate.sources)}))
    finish(emit("member", False, f"non-member: 阻碍点 {x.label(certificate.blocker)}",
                data={"blocker": certificate.blocker}))


@router.command("leq")
@handle_errors
def leq(
    p: Path = typer.Argument(..., help="偏序集 P"),
    q: Path = typer.Argument(..., help="偏序集 Q"),
):
    """
    Q(ε(P)) ⊆ Q(ε(Q))
    """
    verdict = quasivar_service.quasivariety_leq(load_poset(p), load_poset(q))
    finish(emit("leq", verdict, f"Q(ε(P)) ⊆ Q(ε(Q)): {verdict}", data={"leq": verdict}))


@router.command("in-pam")
@handle_errors
def in_pam(
    path: Path = typer.Argument(..., help="偏序集文件"),
    m: int = typer.Option(..., "--m", help="m"),
):
    """
    ε(X) ∈ Paₘ
    """
    verdict = quasivar_service.in_pa_m(load_poset(path), m)
    finish(emit("in-pam", verdict, f"ε(X) ∈ Pa_{m}: {verdict}", data={"in_pa_m": verdict}))


@router.command("contains-pam")
@handle_errors
def contains_pam(
    path: Path = typer.Argument(..., help="偏序集文件"),
    m: int = typer.Option(..., "--m", help="m"),
    cert: Optional[Path] = typer.Option(None, "--cert", help="证书写入文件"),
):
    """
    Paₘ ⊆ Q(ε(X)), 成立时给出到 δ(B̄ₘ) 的满 pp-态射
    """
    witness = quasivar_service.contains_pa_m(load_poset(path), m)
    if witness is None:
        finish(emit("contains-pam", False, f"Pa_{m} 不包含于 Q(ε(X))"))
    text = text_codec.dump_certificates([witness])
    write_or_none(cert, text)
    finish(emit("contains-pam", True, f"Pa_{m} ⊆ Q(ε(X))", text=text, data={"map": list(witness.map)}))


@router.command("reduce")
@handle_errors
def reduce_command(
    path: Path = typer.Argument(..., help="偏序集文件或约化偏序集字面量"),
    literal: bool = typer.Option(False, "--literal", help="只把约化偏序集字面量转换为偏序集格式"),
    out: Optional[Path] = typer.Option(None, "--out", help="结果写入文件"),
):
    """
    约化 P♯ 及典范映射 x -> M(x)
    """
    poset = load_poset(path)
    if literal:
        text = text_codec.dump_poset(poset)
        write_or_none(out, text)
        finish(emit("reduce", True, f"约化偏序集: {poset.n} 个元素", text=text, data={"poset": text}))
    result = quasivar_service.reduction(poset)
    text = text_codec.dump_poset(result.poset)
    write_or_none(out, text)
    cert = text_codec.dump_certificates([result.mapping])
    finish(emit("reduce", True, f"P♯: {result.poset.n} 个元素", text=text + cert,
                data={"poset": text, "map": list(result.mapping.map)}))


@router.command("shrink")
@handle_errors
def shrink(
    path: Path = typer.Argument(..., help="约化偏序集字面量"),
    m: int = typer.Option(..., "--m", help="m"),
    out: Optional[Path] = typer.Option(None, "--out", help="结果写入文件"),
):
    """
    把基集缩小到 m+1 个元素
    """
    result = quasivar_service.shrink_to_base(_load_reduced(path), m)
    text = text_codec.dump_reduced(result.base, result.family)
    write_or_none(out, text)
    finish(emit("shrink", True, f"P^π: 基集 {subset_label(result.base)}", text=text,
                data={"base": list(result.base), "family": [list(s) for s in result.family]}))


@router.command("cover")
@handle_errors
def cover(
    m: int = typer.Option(..., "--m", help="m ≥ 2"),
    dot: Optional[Path] = typer.Option(None, "--dot", help="DOT 写入文件"),
    check: bool = typer.Option(False, "--check", help="m ≤ 3 时做穷举交叉检查"),
):
    """
    Paₘ 在约化偏序集中的唯一覆盖
    """
    reduced = quasivar_service.the_cover(m)
    if check:
        quasivar_service.is_cover_among_reduced(reduced, m, cross_check=True)
    literal = text_codec.dump_reduced(reduced.base, reduced.family)
    poset = text_codec.dump_poset(reduced.realized)
    graph = text_codec.to_dot(reduced.realized, name=f"cover_{m}")
    write_or_none(dot, graph)
    finish(emit("cover", True, f"Pa_{m} 的覆盖: {reduced.realized.n} 个元素",
                text=literal + poset + (graph if dot is None else ""),
                data={"reduced": literal, "poset": poset, "dot": graph}))

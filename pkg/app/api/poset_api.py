from pathlib import Path
from typing import Optional

import typer
from loguru import logger

from app.api.common import emit, finish, handle_errors, load_poset, write_or_none
from app.services.duality_service import duality_service
from app.services.poset_service import poset_service
from app.services.quasivar_service import quasivar_service
from app.services.text_codec import text_codec

router = typer.Typer(help="偏序集")


@router.command("validate")
@handle_errors
def validate(path: Path = typer.Argument(..., help="偏序集 (poset) 或代数表 (palg) 文件")):
    """
    校验偏序公理或 p-代数公理
    """
    logger.info(f"CLI调用: validate, path: {path}")
    text = text_codec.read_text(path)
    if text.lstrip().startswith("palg"):
        algebra = text_codec.parse_algebra(text)
        report = duality_service.is_p_algebra(algebra)
        finish(emit("validate", report.ok, report.message,
                    data={"axiom": report.axiom, "witness": list(report.witness)}))
    poset = text_codec.parse_poset(text, check=False)
    report = poset_service.validate(poset)
    finish(emit("validate", report.ok, report.message,
                data={"axiom": report.axiom, "witness": list(report.witness), "n": poset.n}))


@router.command("dot")
@handle_errors
def dot(
    path: Path = typer.Argument(..., help="偏序集文件或约化偏序集字面量"),
    out: Optional[Path] = typer.Option(None, "--out", help="写入 DOT 文件, 默认输出到 stdout"),
):
    """
    输出 Hasse 图 (DOT)
    """
    poset = load_poset(path)
    text = text_codec.to_dot(poset, name=path.stem)
    if out is not None:
        write_or_none(out, text)
        finish(emit("dot", True, f"DOT 已写入 {out}", data={"path": str(out)}))
    finish(emit("dot", True, f"Hasse 图: {poset.n} 个元素", text=text, data={"dot": text}))


@router.command("enumerate")
@handle_errors
def enumerate_command(
    n: int = typer.Option(..., "--n", help="规模上限"),
    dump: Optional[Path] = typer.Option(None, "--dump", help="把每个偏序集写入该目录"),
):
    """
    枚举同构意义下的全部偏序集并按规模计数
    """
    counts = {}
    for index, poset in enumerate(poset_service.enumerate_posets(n)):
        counts[poset.n] = counts.get(poset.n, 0) + 1
        if dump is not None:
            dump.mkdir(parents=True, exist_ok=True)
            text_codec.write_text(dump / f"n{poset.n}_{index:05d}.poset", text_codec.dump_poset(poset))
    text = "\n".join(f"n={size}: {count}" for size, count in sorted(counts.items()))
    finish(emit("enumerate", True, f"共 {sum(counts.values())} 个偏序集", text=text,
                data={str(size): count for size, count in counts.items()}))


@router.command("bm")
@handle_errors
def bm(
    m: int = typer.Option(..., "--m", help="极大元个数"),
    out: Optional[Path] = typer.Option(None, "--out", help="写入文件"),
):
    """
    输出 δ(B̄ₘ)
    """
    poset = poset_service.make_bm_poset(m)
    text = text_codec.dump_poset(poset)
    write_or_none(out, text)
    finish(emit("bm", True, f"δ(B̄_{m}): {poset.n} 个元素", text=text, data={"poset": text}))


@router.command("width")
@handle_errors
def width(path: Path = typer.Argument(..., help="偏序集文件")):
    """
    max |M(x)|, 即 ε(P) 所在的最小 Paₘ (空偏序集为 -1)
    """
    poset = load_poset(path)
    value = quasivar_service.width(poset)
    finish(emit("width", True, f"width = {value}", data={"width": value}))

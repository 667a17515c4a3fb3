from pathlib import Path
from typing import Optional

import typer

from app.api.common import emit, finish, handle_errors, load_poset, write_or_none
from app.services.duality_service import duality_service
from app.services.text_codec import text_codec

router = typer.Typer(help="对偶")


@router.command("epsilon")
@handle_errors
def epsilon(
    path: Path = typer.Argument(..., help="偏序集文件"),
    out: Optional[Path] = typer.Option(None, "--out", help="代数表写入文件"),
):
    """
    ε(P): 上集构成的 p-代数
    """
    algebra = duality_service.epsilon(load_poset(path))
    text = text_codec.dump_algebra(algebra)
    write_or_none(out, text)
    finish(emit("epsilon", True, f"ε(P): {algebra.size} 个元素", text=text if out is None else None,
                data={"size": algebra.size}))


@router.command("delta")
@handle_errors
def delta(
    path: Path = typer.Argument(..., help="代数表文件"),
    out: Optional[Path] = typer.Option(None, "--out", help="偏序集写入文件"),
):
    """
    δ(A): 并既约元构成的偏序集
    """
    poset = duality_service.delta(text_codec.parse_algebra(text_codec.read_text(path)))
    text = text_codec.dump_poset(poset)
    write_or_none(out, text)
    finish(emit("delta", True, f"δ(A): {poset.n} 个元素", text=text, data={"poset": text}))


@router.command("ibm")
@handle_errors
def ibm(
    path: Path = typer.Argument(..., help="代数表文件, 或偏序集文件 (先取 ε)"),
    m: int = typer.Option(..., "--m", help="恒等式 ib_m 的 m"),
):
    """
    穷举求值恒等式 ib_m
    """
    text = text_codec.read_text(path)
    if text.lstrip().startswith("palg"):
        algebra = text_codec.parse_algebra(text)
    else:
        algebra = duality_service.epsilon(load_poset(path))
    result = duality_service.evaluate_ibm(algebra, m)
    if result.satisfied:
        finish(emit("ibm", True, f"ib_{m} 成立 (检查了 {result.checked} 个赋值)", data=result.model_dump()))
    names = ", ".join(algebra.name(x) for x in result.assignment)
    finish(emit("ibm", False, f"ib_{m} 不成立, 反例赋值: ({names})", data=result.model_dump()))

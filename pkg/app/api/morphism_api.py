from pathlib import Path
from typing import List, Optional

import typer
from loguru import logger

from app.api.common import emit, finish, handle_errors, load_poset, write_or_none
from app.schemas.morphism_models import PpMorphism
from app.services.exceptions import FormatError
from app.services.morphism_service import morphism_service
from app.services.text_codec import text_codec

router = typer.Typer(help="pp-态射")


def _parse_map(raw: str) -> List[int]:
    try:
        return [int(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise FormatError(f"映射格式应为逗号分隔的整数: {raw}")


@router.command("check-pp")
@handle_errors
def check_pp(
    source: Path = typer.Option(..., "--source", help="源偏序集"),
    target: Path = typer.Option(..., "--target", help="目标偏序集"),
    mapping: str = typer.Option(..., "--map", help="映射数组, 例如 0,1,1"),
):
    """
    检查给定映射是否为 pp-态射
    """
    p, q = load_poset(source), load_poset(target)
    check = morphism_service.is_pp_morphism(_parse_map(mapping), p, q)
    finish(emit("check-pp", check.ok, check.message,
                data={"condition": check.condition, "element": check.element}))


@router.command("find-pp")
@handle_errors
def find_pp(
    source: Path = typer.Option(..., "--source", help="源偏序集"),
    target: Path = typer.Option(..., "--target", help="目标偏序集"),
    surjective: bool = typer.Option(False, "--surjective", help="只找满射"),
    limit: Optional[int] = typer.Option(None, "--limit", help="最多输出个数"),
    cert: Optional[Path] = typer.Option(None, "--cert", help="证书写入文件"),
):
    """
    搜索 pp-态射, 输出证书
    """
    p, q = load_poset(source), load_poset(target)
    logger.info(f"CLI调用: find-pp, surjective: {surjective}, limit: {limit}")
    if surjective:
        found = morphism_service.exists_surjective_pp(p, q)
        morphisms = [found] if found is not None else []
    else:
        morphisms = morphism_service.enumerate_pp_morphisms(p, q, limit)
    text = text_codec.dump_certificates(morphisms) if morphisms else ""
    write_or_none(cert, text)
    finish(emit("find-pp", bool(morphisms), f"找到 {len(morphisms)} 个 pp-态射", text=text,
                data={"maps": [list(f.map) for f in morphisms]}))


@router.command("images")
@handle_errors
def images(
    path: Path = typer.Argument(..., help="偏序集文件"),
    all_images: bool = typer.Option(False, "--all", help="同时列出非约化的像"),
):
    """
    同构意义下的满 pp-态射像, 默认只列约化的像
    """
    p = load_poset(path)
    found = morphism_service.pp_morphic_images(p, reduced_only=not all_images)
    text = "\n".join(text_codec.dump_poset(image) for image in found)
    finish(emit("images", True, f"共 {len(found)} 个 pp-态射像", text=text,
                data={"sizes": [image.n for image in found], "posets": [text_codec.dump_poset(i) for i in found]}))


@router.command("check-cert")
@handle_errors
def check_cert(
    source: List[Path] = typer.Option(..., "--source", help="生成元, 可重复; 证书中的 source k 指第 k 个"),
    target: Path = typer.Option(..., "--target", help="目标偏序集"),
    cert: Path = typer.Option(..., "--cert", help="证书文件"),
    cover: bool = typer.Option(False, "--cover", help="另外要求各映射的像合起来覆盖目标"),
):
    """
    重新验证证书中的每个映射
    """
    sources = [load_poset(path) for path in source]
    q = load_poset(target)
    blocks = text_codec.parse_certificates(text_codec.read_text(cert))
    covered = 0
    for index, (origin, mapping) in enumerate(blocks):
        if not 0 <= origin < len(sources):
            raise FormatError(f"第 {index} 个证书的 source {origin} 超出生成元个数 {len(sources)}")
        check = morphism_service.is_pp_morphism(mapping, sources[origin], q)
        if not check.ok:
            finish(emit("check-cert", False, f"第 {index} 个映射无效: {check.message}",
                        data={"index": index, "condition": check.condition}))
        covered |= PpMorphism(source=sources[origin], target=q, map=mapping).image_mask
    if cover and covered != q.full_mask:
        missing = next(y for y in range(q.n) if not covered >> y & 1)
        finish(emit("check-cert", False, f"像没有覆盖目标, 缺少 {q.label(missing)}",
                    data={"uncovered": missing}))
    finish(emit("check-cert", True, f"{len(blocks)} 个映射均为 pp-态射", data={"count": len(blocks)}))

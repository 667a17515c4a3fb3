import functools
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Optional

import typer
from loguru import logger

from config.settings import settings
from app.schemas.poset_models import Poset
from app.schemas.report_models import CommandResult
from app.services.exceptions import PaqError
from app.services.quasivar_service import quasivar_service
from app.services.text_codec import text_codec

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_USAGE = 2


class OutputFormat(str, Enum):
    TEXT = "text"
    RECORDS = "records"


class CliState:
    """全局选项, 由 main 的回调设置"""

    def __init__(self):
        self.format = OutputFormat.TEXT
        self.jobs: Optional[int] = None


cli_state = CliState()


def setup_logging(level: str):
    """日志只写 stderr, stdout 只留给命令输出"""
    logger.remove()
    logger.add(sys.stderr, format=settings.LOG_FORMAT, level=level, colorize=False)


def handle_errors(func: Callable) -> Callable:
    """领域错误和 IO 错误统一转为退出码 2"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (PaqError, OSError) as e:
            logger.error(f"命令 {func.__name__} 失败: {e}")
            if cli_state.format == OutputFormat.RECORDS:
                typer.echo(CommandResult.error_response(command=func.__name__, message=str(e)).model_dump_json())
            else:
                typer.echo(f"错误: {e}", err=True)
            raise typer.Exit(code=EXIT_USAGE)

    return wrapper


def load_poset(path: Path) -> Poset:
    """读取偏序集文件, 也接受约化偏序集字面量"""
    text = text_codec.read_text(path)
    head = next((line.split() for line in text.splitlines() if line.split("#", 1)[0].strip()), [""])
    if head[0] == "reduced":
        base, family = text_codec.parse_reduced(text)
        return quasivar_service.make_reduced(base, family).realized
    return text_codec.parse_poset(text)


def emit(command: str, success: bool, message: str, text: Optional[str] = None, data: Any = None) -> int:
    """
    输出命令结果并返回退出码

    Args:
        command: 子命令名
        success: 判定结果
        message: 一行摘要
        text: 文本模式下在摘要之后输出的正文 (证书, 偏序集等)
        data: 记录模式下的结构化数据

    Returns:
        0 表示真/通过, 1 表示假/失败
    """
    if cli_state.format == OutputFormat.RECORDS:
        factory = CommandResult.success_response if success else CommandResult.error_response
        record = factory(command=command, message=message, data=data)
        typer.echo(record.model_dump_json())
    else:
        typer.echo(message)
        if text:
            typer.echo(text.rstrip("\n"))
    return EXIT_TRUE if success else EXIT_FALSE


def finish(code: int):
    raise typer.Exit(code=code)


def write_or_none(path: Optional[Path], text: str):
    if path is not None:
        text_codec.write_text(path, text)

import sys
from pathlib import Path
from typing import List, Optional

# 添加项目根目录到Python路径
root_dir = Path(__file__).parent
sys.path.insert(0, str(root_dir))

import click
import typer
from loguru import logger

# 导入配置
from config.settings import settings
from app.api.common import EXIT_USAGE, OutputFormat, cli_state, setup_logging

# 导入路由
from app.api.poset_api import router as poset_router
from app.api.morphism_api import router as morphism_router
from app.api.duality_api import router as duality_router
from app.api.quasivar_api import router as quasivar_router
from app.api.verify_api import router as verify_router

# 创建命令行应用
app = typer.Typer(
    name=settings.APP_NAME,
    help="有限 p-代数的拟簇: 基于 Priestley 对偶的成员判定与覆盖验证",
    add_completion=False,
    no_args_is_help=True,
)

# 注册路由, 子命令保持扁平
for router in (poset_router, morphism_router, duality_router, quasivar_router, verify_router):
    app.registered_commands.extend(router.registered_commands)

setup_logging(settings.LOG_LEVEL)


def _version_callback(value: bool):
    if value:
        typer.echo(f"{settings.APP_NAME} {settings.VERSION}")
        raise typer.Exit()


@app.callback()
def main(
    output_format: OutputFormat = typer.Option(OutputFormat.TEXT, "--format", help="输出格式: text 或 records"),
    jobs: Optional[int] = typer.Option(None, "--jobs", min=1, help="并行进程数"),
    verbose: bool = typer.Option(False, "--verbose", help="输出 DEBUG 日志"),
    quiet: bool = typer.Option(False, "--quiet", help="只输出 WARNING 及以上日志"),
    version: bool = typer.Option(False, "--version", callback=_version_callback, is_eager=True,
                                 help="显示版本"),
):
    """全局选项"""
    cli_state.format = output_format
    cli_state.jobs = jobs
    level = "DEBUG" if verbose else "WARNING" if quiet else settings.LOG_LEVEL
    setup_logging(level)


def run(argv: Optional[List[str]] = None) -> int:
    """
    执行一条命令并返回退出码

    Args:
        argv: 命令行参数, 默认取 sys.argv[1:]

    Returns:
        0 表示真/通过, 1 表示假/失败, 2 表示用法或输入错误
    """
    command = typer.main.get_command(app)
    try:
        code = command.main(args=argv, prog_name=settings.APP_NAME, standalone_mode=False)
        return code if isinstance(code, int) else 0
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        logger.warning("已中断")
        return EXIT_USAGE
    except Exception as e:
        # 全局异常处理
        logger.error(f"全局异常: {e}")
        typer.echo(f"错误: {e}", err=True)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(run())

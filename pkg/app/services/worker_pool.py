import asyncio
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Optional, Sequence

from loguru import logger

from config.settings import settings


class WorkerPool:
    """把互相独立的任务分发到多个进程, 结果按提交顺序返回"""

    def resolve_jobs(self, jobs: Optional[int]) -> int:
        return max(1, jobs if jobs is not None else settings.JOBS)

    def map(self, func: Callable[[Any], Any], items: Sequence[Any], jobs: Optional[int] = None) -> List[Any]:
        """
        对每个任务调用 func

        Args:
            func: 模块级函数 (需要可被 pickle)
            items: 任务参数列表
            jobs: 进程数, 默认取 settings.JOBS

        Returns:
            与 items 顺序一致的结果列表
        """
        workers = self.resolve_jobs(jobs)
        if workers == 1 or len(items) <= 1:
            return [func(item) for item in items]
        logger.debug(f"并行执行 {len(items)} 个任务, 进程数 {workers}")
        return asyncio.run(self._gather(func, items, workers))

    async def _gather(self, func: Callable[[Any], Any], items: Sequence[Any], workers: int) -> List[Any]:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=workers) as executor:
            tasks = [loop.run_in_executor(executor, func, item) for item in items]
            responses = await asyncio.gather(*tasks, return_exceptions=True)

        results = []
        for i, response in enumerate(responses):
            if isinstance(response, Exception):
                logger.error(f"任务 {i} 执行失败: {response}")
                raise response
            results.append(response)
        return results


# 创建全局实例
worker_pool = WorkerPool()

from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class CheckVerdict(str, Enum):
    """验证结论"""
    PASS = "pass"
    FAIL = "fail"


class Mutation(str, Enum):
    """植入的故障, 用于检验验证器本身"""
    NONE = "none"
    DROP_MAXIMA_CHECK = "drop-maxima-check"   # check_duality 负责发现
    CORRUPT_STAR = "corrupt-star"             # check_lemma_mplus1 负责发现
    SKIP_FAMILY = "skip-family"               # check_unique_cover 负责发现


class CheckReport(BaseModel):
    """单项验证的报告"""
    name: str
    params: Dict[str, Any] = {}
    verdict: CheckVerdict = CheckVerdict.PASS
    certificates: List[str] = []          # 文本格式的证书
    certificate_paths: List[str] = []
    counterexample: Optional[str] = None
    notes: List[str] = []
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.verdict == CheckVerdict.PASS

    def fail(self, counterexample: str) -> "CheckReport":
        # 只保留第一个反例
        if self.verdict == CheckVerdict.PASS:
            self.verdict = CheckVerdict.FAIL
            self.counterexample = counterexample
        return self


class CommandResult(BaseModel):
    """命令输出的记录格式"""
    success: bool = True
    command: str
    message: str = "操作成功"
    data: Optional[Any] = None
    timestamp: Optional[datetime] = Field(default=None)

    @classmethod
    def success_response(cls, command: str, data: Any = None, message: str = "操作成功"):
        return cls(
            success=True,
            command=command,
            message=message,
            data=data,
            timestamp=datetime.now()
        )

    @classmethod
    def error_response(cls, command: str, message: str = "操作失败", data: Any = None):
        return cls(
            success=False,
            command=command,
            message=message,
            data=data,
            timestamp=datetime.now()
        )

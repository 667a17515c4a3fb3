from typing import Any, Optional


class PaqError(ValueError):
    """所有领域错误的基类"""


class BudgetExceededError(PaqError):
    """超出配置的规模上限或搜索预算"""

    def __init__(self, what: str, limit: int, requested: Optional[int] = None):
        self.what = what
        self.limit = limit
        self.requested = requested
        detail = f"{what}: 上限 {limit}"
        if requested is not None:
            detail += f", 请求 {requested}"
        super().__init__(f"超出预算 - {detail}")


class IndexRangeError(PaqError):
    """元素下标越界"""


class InvalidAlgebraError(PaqError):
    """运算表不构成 p-代数"""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class PreconditionError(PaqError):
    """前提条件不满足, 消息中写明失败的假设"""


class FormatError(PaqError):
    """文本输入格式错误"""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"第 {line_no} 行: {message}"
        super().__init__(message)

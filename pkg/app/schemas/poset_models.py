from functools import cached_property
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field


def iter_bits(mask: int):
    """按从小到大的顺序遍历掩码中的下标"""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Poset(BaseModel):
    """
    有限偏序集

    元素为下标 0..n-1, 序关系按行存成位掩码:
    leq[i] 的第 j 位为 1 当且仅当 i <= j (即 i 的上集).
    构造函数不做校验, 校验交给 poset_service.validate.
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0)
    leq: Tuple[int, ...] = ()
    labels: Optional[Tuple[str, ...]] = None

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Tuple[int, int]],
                   labels: Optional[Sequence[str]] = None, close: bool = True) -> "Poset":
        """
        由 (i, j) 即 i <= j 的关系对构造偏序集

        Args:
            n: 元素个数
            pairs: 关系对
            labels: 元素名称
            close: 是否补全自反传递闭包

        Returns:
            偏序集 (反对称性不在这里检查)
        """
        rows = [0] * n
        for i, j in pairs:
            rows[i] |= 1 << j
        if close:
            for i in range(n):
                rows[i] |= 1 << i
            # Warshall 闭包
            for k in range(n):
                bit = 1 << k
                row_k = rows[k]
                for i in range(n):
                    if rows[i] & bit:
                        rows[i] |= row_k
        return cls(n=n, leq=tuple(rows), labels=tuple(labels) if labels is not None else None)

    @classmethod
    def chain(cls, n: int) -> "Poset":
        return cls.from_pairs(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def antichain(cls, n: int) -> "Poset":
        return cls.from_pairs(n, [])

    def le(self, i: int, j: int) -> bool:
        return bool(self.leq[i] >> j & 1)

    def label(self, i: int) -> str:
        if self.labels is not None:
            return self.labels[i]
        return str(i)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @cached_property
    def down(self) -> Tuple[int, ...]:
        """下集掩码: down[j] 的第 i 位为 1 当且仅当 i <= j"""
        rows = [0] * self.n
        for i in range(self.n):
            for j in iter_bits(self.leq[i]):
                rows[j] |= 1 << i
        return tuple(rows)

    @cached_property
    def maxima_mask(self) -> int:
        mask = 0
        for i in range(self.n):
            if self.leq[i] == 1 << i:
                mask |= 1 << i
        return mask

    @cached_property
    def max_masks(self) -> Tuple[int, ...]:
        """每个元素上方的极大元集合 M(x), 以掩码表示"""
        return tuple(row & self.maxima_mask for row in self.leq)

    def is_maximal(self, i: int) -> bool:
        return bool(self.maxima_mask >> i & 1)

    def elements(self) -> range:
        return range(self.n)

    def pairs(self) -> List[Tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in iter_bits(self.leq[i])]


class MaxSet(BaseModel):
    """某个元素上方的极大元集合"""
    model_config = ConfigDict(frozen=True)

    owner: int
    maxima: FrozenSet[int]


class OrderReport(BaseModel):
    """偏序公理校验结果"""
    model_config = ConfigDict(frozen=True)

    ok: bool = True
    axiom: Optional[str] = None         # reflexivity / antisymmetry / transitivity / shape
    witness: Tuple[int, ...] = ()
    message: str = "偏序关系合法"


class UnionResult(BaseModel):
    """不交并及其分量映射"""
    model_config = ConfigDict(frozen=True)

    poset: Poset
    component: Tuple[int, ...]          # 元素 -> 分量编号
    offsets: Tuple[int, ...]            # 各分量在并中的起始下标

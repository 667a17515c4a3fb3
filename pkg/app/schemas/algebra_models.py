from functools import cached_property
from typing import FrozenSet, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.schemas.poset_models import iter_bits


class PAlgebra(BaseModel):
    """
    有限 p-代数, 以运算表给出

    meet/join 为二元运算表, star 为伪补运算表.
    由 epsilon 构造时 upsets[i] 为元素 i 对应上集的位掩码.
    """
    model_config = ConfigDict(frozen=True)

    size: int = Field(..., ge=1)
    meet: Tuple[Tuple[int, ...], ...]
    join: Tuple[Tuple[int, ...], ...]
    star: Tuple[int, ...]
    zero: int
    one: int
    element_names: Optional[Tuple[str, ...]] = None
    upsets: Optional[Tuple[int, ...]] = None

    def name(self, i: int) -> str:
        if self.element_names is not None:
            return self.element_names[i]
        return str(i)

    def le(self, x: int, y: int) -> bool:
        return self.meet[x][y] == x

    @cached_property
    def meet_array(self) -> np.ndarray:
        return np.asarray(self.meet, dtype=np.int64).reshape(self.size, self.size)

    @cached_property
    def join_array(self) -> np.ndarray:
        return np.asarray(self.join, dtype=np.int64).reshape(self.size, self.size)

    @cached_property
    def star_array(self) -> np.ndarray:
        return np.asarray(self.star, dtype=np.int64).reshape(self.size)


class Upset(BaseModel):
    """偏序集的上集, 以位掩码表示"""
    model_config = ConfigDict(frozen=True)

    mask: int = Field(..., ge=0)

    @property
    def members(self) -> FrozenSet[int]:
        return frozenset(iter_bits(self.mask))


class AxiomReport(BaseModel):
    """p-代数公理校验结果"""
    model_config = ConfigDict(frozen=True)

    ok: bool = True
    axiom: Optional[str] = None
    witness: Tuple[int, ...] = ()
    message: str = "满足 p-代数公理"


class IdentityResult(BaseModel):
    """恒等式 ib_m 的求值结果"""
    model_config = ConfigDict(frozen=True)

    m: int
    satisfied: bool
    assignment: Optional[Tuple[int, ...]] = None   # 字典序最小的反例赋值
    checked: int = 0

from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict

from app.schemas.morphism_models import PpMorphism
from app.schemas.poset_models import Poset


class MembershipVerdict(str, Enum):
    """成员判定结果"""
    MEMBER = "member"
    NON_MEMBER = "non-member"


class ReducedPoset(BaseModel):
    """
    约化偏序集 P(M, F)

    载体为 {M} ∪ {{a}: a∈M} ∪ F, 按反包含排序.
    subsets[i] 是 realized 中元素 i 对应的子集.
    """
    model_config = ConfigDict(frozen=True)

    base: Tuple[int, ...]
    family: Tuple[Tuple[int, ...], ...]
    subsets: Tuple[Tuple[int, ...], ...]
    realized: Poset

    def index_of(self, subset) -> int:
        return self.subsets.index(tuple(sorted(subset)))

    @property
    def bottom(self) -> int:
        return self.index_of(self.base)


class MembershipCertificate(BaseModel):
    """成员证书: 覆盖目标的 pp-态射列表, 或无法覆盖的点"""
    model_config = ConfigDict(frozen=True)

    verdict: MembershipVerdict
    target: Poset
    witnesses: Tuple[PpMorphism, ...] = ()
    sources: Tuple[int, ...] = ()       # 每个见证来自哪个生成元
    blocker: Optional[int] = None

    @property
    def is_member(self) -> bool:
        return self.verdict == MembershipVerdict.MEMBER


class FamilyAdmission(BaseModel):
    """family_admits_pa_m 的结果及见证对 (a, b)"""
    model_config = ConfigDict(frozen=True)

    admits: bool
    pair: Optional[Tuple[int, int]] = None


class Reduction(BaseModel):
    """约化 P♯ 以及典范映射 x -> M(x)"""
    model_config = ConfigDict(frozen=True)

    poset: Poset
    mapping: PpMorphism
    max_sets: Tuple[Tuple[int, ...], ...]

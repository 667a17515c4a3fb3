from typing import Dict, FrozenSet, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from app.schemas.poset_models import Poset


class PpMorphism(BaseModel):
    """source -> target 的 pp-态射, map 为下标数组"""
    model_config = ConfigDict(frozen=True)

    source: Poset
    target: Poset
    map: Tuple[int, ...]

    @property
    def image_mask(self) -> int:
        mask = 0
        for y in self.map:
            mask |= 1 << y
        return mask

    @property
    def image(self) -> FrozenSet[int]:
        return frozenset(self.map)

    def is_surjective(self) -> bool:
        return self.image_mask == self.target.full_mask


class MorphismCheck(BaseModel):
    """is_pp_morphism 的检查结果"""
    model_config = ConfigDict(frozen=True)

    ok: bool = True
    condition: Optional[str] = None     # monotone / maxima
    element: Optional[Tuple[int, ...]] = None
    message: str = "是 pp-态射"


class CoverageReport(BaseModel):
    """目标中被某个 pp-态射的像覆盖到的点"""
    model_config = ConfigDict(frozen=True)

    target: Poset
    covered: FrozenSet[int]
    morphisms: Tuple[PpMorphism, ...] = ()
    witness_of: Dict[int, int] = {}     # 被覆盖的点 -> morphisms 中的下标

    def witness(self, point: int) -> Optional[PpMorphism]:
        index = self.witness_of.get(point)
        return None if index is None else self.morphisms[index]

    @property
    def uncovered(self) -> Tuple[int, ...]:
        return tuple(y for y in range(self.target.n) if y not in self.covered)

    @property
    def complete(self) -> bool:
        return len(self.covered) == self.target.n


class CopySurjection(BaseModel):
    """若干份源偏序集的不交并到目标的满 pp-态射, 按分量给出"""
    model_config = ConfigDict(frozen=True)

    copies: int
    morphisms: Tuple[PpMorphism, ...]

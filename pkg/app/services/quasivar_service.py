from itertools import combinations
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from loguru import logger

from config.settings import settings
from app.schemas.morphism_models import PpMorphism
from app.schemas.poset_models import Poset, iter_bits
from app.schemas.quasivar_models import (
    FamilyAdmission, MembershipCertificate, MembershipVerdict, ReducedPoset, Reduction,
)
from app.services.exceptions import BudgetExceededError, PaqError, PreconditionError
from app.services.morphism_service import morphism_service
from app.services.poset_service import poset_service

Subset = Tuple[int, ...]


def subset_label(subset: Iterable) -> str:
    return "{" + ",".join(str(a) for a in subset) + "}"


class QuasivarService:
    """拟簇层面的判定: Paₘ 包含关系, 成员判定, 约化与约化偏序集上的覆盖刻画"""

    # ---- Paₘ ----

    def max_set_sizes(self, x: Poset) -> Dict[int, int]:
        return {i: bin(x.max_masks[i]).count("1") for i in range(x.n)}

    def width(self, x: Poset) -> int:
        """使 ε(x) ∈ Paₘ 的最小 m, 空偏序集 (平凡代数) 记为 -1"""
        if x.n == 0:
            return -1
        return max(self.max_set_sizes(x).values())

    def in_pa_m(self, x: Poset, m: int) -> bool:
        """ε(x) ∈ Paₘ 当且仅当每个元素上方至多 m 个极大元"""
        if m < 1:
            raise PreconditionError(f"m 必须为正整数: {m}")
        return all(size <= m for size in self.max_set_sizes(x).values())

    def contains_pa_m(self, x: Poset, m: int) -> Optional[PpMorphism]:
        """
        Paₘ ⊆ Q(ε(x)) 当且仅当存在满 pp-态射 x ->> δ(B̄ₘ)

        Args:
            x: 偏序集
            m: 正整数

        Returns:
            到 make_bm_poset(m) 的满 pp-态射, 不存在时为 None
        """
        if m < 1:
            raise PreconditionError(f"m 必须为正整数: {m}")
        return morphism_service.exists_surjective_pp(x, poset_service.make_bm_poset(m))

    def is_strictly_above_pa_m(self, x: Poset, m: int) -> bool:
        return self.contains_pa_m(x, m) is not None and not self.in_pa_m(x, m)

    # ---- 成员判定 ----

    def member(self, x: Poset, gens: Sequence[Poset]) -> MembershipCertificate:
        """
        判断 ε(x) ∈ Q({ε(g)}): x 的每个点都落在某个生成元的某个 pp-态射的像中

        Args:
            x: 目标偏序集
            gens: 生成元, 非空

        Returns:
            成员证书 (覆盖目标的见证) 或非成员证书 (无法覆盖的点)
        """
        if not gens:
            raise PreconditionError("生成元列表不能为空")
        logger.info(f"成员判定: |x|={x.n}, 生成元 {len(gens)} 个")
        candidates: List[Tuple[int, PpMorphism]] = []
        covered = 0
        for source, g in enumerate(gens):
            report = morphism_service.covered_points(g, x)
            for f in report.morphisms:
                candidates.append((source, f))
                covered |= f.image_mask

        if covered != x.full_mask:
            blocker = next(y for y in range(x.n) if not covered >> y & 1)
            logger.info(f"非成员: 点 {x.label(blocker)} 不在任何 pp-态射的像中")
            return MembershipCertificate(verdict=MembershipVerdict.NON_MEMBER, target=x, blocker=blocker)

        witnesses: List[PpMorphism] = []
        sources: List[int] = []
        remaining = x.full_mask
        while remaining:
            # 贪心: 新覆盖最多的见证优先, 平局按生成元顺序和映射字典序
            source, f = min(candidates,
                            key=lambda item: (-bin(item[1].image_mask & remaining).count("1"), item[0], item[1].map))
            witnesses.append(f)
            sources.append(source)
            remaining &= ~f.image_mask
        return MembershipCertificate(verdict=MembershipVerdict.MEMBER, target=x,
                                     witnesses=tuple(witnesses), sources=tuple(sources))

    def quasivariety_leq(self, p: Poset, q: Poset) -> bool:
        """Q(ε(p)) ⊆ Q(ε(q))"""
        return self.member(p, [q]).is_member

    def quasivariety_equivalent(self, p: Poset, q: Poset) -> bool:
        return self.quasivariety_leq(p, q) and self.quasivariety_leq(q, p)

    # ---- 约化 ----

    def reduction(self, p: Poset) -> Reduction:
        """
        约化 P♯: 不同的极大元集合 M(x), 按反包含排序, 以及典范映射 x -> M(x)

        Args:
            p: 偏序集

        Returns:
            约化偏序集与映射
        """
        distinct = sorted(set(p.max_masks), key=lambda mask: (-bin(mask).count("1"), tuple(iter_bits(mask))))
        index = {mask: i for i, mask in enumerate(distinct)}
        pairs = [(i, j) for i, a in enumerate(distinct) for j, b in enumerate(distinct) if b & ~a == 0]
        labels = ["{" + ",".join(p.label(t) for t in iter_bits(mask)) + "}" for mask in distinct]
        reduced = Poset.from_pairs(len(distinct), pairs, labels=labels)
        mapping = PpMorphism(source=p, target=reduced, map=tuple(index[mask] for mask in p.max_masks))
        return Reduction(poset=reduced, mapping=mapping,
                         max_sets=tuple(tuple(iter_bits(mask)) for mask in distinct))

    # ---- 约化偏序集 ----

    def make_reduced(self, base: Iterable[int], family: Iterable[Iterable[int]]) -> ReducedPoset:
        """
        构造 P(M, F) = {M} ∪ {{a}: a∈M} ∪ F, 按反包含排序

        F 中等于 M 或单点的成员被吸收.

        Args:
            base: 基集 M
            family: 子集族 F

        Returns:
            约化偏序集, 下标 0 为 M, 之后依次为各单点和 F 的成员
        """
        base_tuple: Subset = tuple(sorted(set(base)))
        if not base_tuple:
            raise PreconditionError("基集 M 不能为空")
        members = set()
        for raw in family:
            subset = tuple(sorted(set(raw)))
            if not subset:
                raise PreconditionError("F 的成员不能为空")
            if not set(subset) <= set(base_tuple):
                raise PreconditionError(f"F 的成员 {subset_label(subset)} 不是 M 的子集")
            if len(subset) > 1 and subset != base_tuple:
                members.add(subset)
        kept = tuple(sorted(members, key=lambda s: (len(s), s)))
        subsets: List[Subset] = [base_tuple] + [(a,) for a in base_tuple if (a,) != base_tuple] + list(kept)
        pairs = [(i, j) for i, s in enumerate(subsets) for j, t in enumerate(subsets) if set(t) <= set(s)]
        realized = Poset.from_pairs(len(subsets), pairs, labels=[subset_label(s) for s in subsets])
        return ReducedPoset(base=base_tuple, family=kept, subsets=tuple(subsets), realized=realized)

    def shrink_to_base(self, p: ReducedPoset, m: int) -> ReducedPoset:
        """
        把基集缩小到 m+1 个元素, 同时保持 Paₘ ⊆ Q(ε(结果)) ⊆ Q(ε(p))

        由满射 f: p ->> δ(B̄ₘ) 得到基集在 a -> f({a}) 下的纤维划分,
        再反复拆分最大的块 (平局取字典序第一个), 直到恰有 m+1 块.
        新基集元素以块中最小元素命名, 结果为各成员在商映射下的像.

        Args:
            p: 约化偏序集
            m: 正整数

        Returns:
            基集大小为 m+1 的约化偏序集
        """
        if m < 1:
            raise PreconditionError(f"m 必须为正整数: {m}")
        if len(p.base) < m + 1:
            raise PreconditionError(f"需要 |M| ≥ m+1, 实际 |M|={len(p.base)}, m={m}")
        f = self.contains_pa_m(p.realized, m)
        if f is None:
            raise PreconditionError(f"不存在到 δ(B̄_{m}) 的满 pp-态射, 即 Pa_{m} 不包含于 Q(ε(P))")

        fibers: Dict[int, List[int]] = {}
        for a in p.base:
            fibers.setdefault(f.map[p.index_of((a,))], []).append(a)
        blocks = sorted(fibers.values())
        while len(blocks) < m + 1:
            largest = min(blocks, key=lambda block: (-len(block), block))
            blocks.remove(largest)
            blocks += [largest[:-1], largest[-1:]]
            blocks.sort()
        logger.debug(f"基集划分: {blocks}")

        rename = {a: block[0] for block in blocks for a in block}
        image_family = [tuple(sorted({rename[a] for a in subset})) for subset in p.family]
        result = self.make_reduced(sorted(rename.values()), image_family)

        if self.contains_pa_m(result.realized, m) is None or not self.member(result.realized, [p.realized]).is_member:
            logger.error(f"shrink_to_base 结果不满足包含关系: base={result.base}, family={result.family}")
            raise PaqError("shrink_to_base 的结果不满足 Paₘ ⊆ Q(ε(P^π)) ⊆ Q(ε(P))")
        return result

    @staticmethod
    def _allowed(base: Subset, a: int, b: int) -> set:
        return {(a, b), tuple(x for x in base if x != a), tuple(x for x in base if x != b)}

    def family_admits_pa_m(self, base: Iterable[int], family: Iterable[Iterable[int]], m: int) -> FamilyAdmission:
        """
        是否存在不同的 a, b ∈ M 使 F ⊆ {{a,b}, M−{a}, M−{b}}

        Args:
            base: 基集, 大小必须为 m+1
            family: 子集族
            m: 整数, 至少为 2

        Returns:
            判定结果, 成立时给出字典序最小的 (a, b)
        """
        reduced = self.make_reduced(base, family)
        if m < 2:
            raise PreconditionError(f"刻画只对 m ≥ 2 成立, 实际 m={m}")
        if len(reduced.base) != m + 1:
            raise PreconditionError(f"需要 |M| = m+1 = {m + 1}, 实际 |M|={len(reduced.base)}")
        members = set(reduced.family)
        for a, b in combinations(reduced.base, 2):
            if members <= self._allowed(reduced.base, a, b):
                return FamilyAdmission(admits=True, pair=(a, b))
        return FamilyAdmission(admits=False)

    def the_cover(self, m: int) -> ReducedPoset:
        """基集 1..m+1 上 F = {{1,2}, M−{1}, M−{2}} 的约化偏序集"""
        if m < 2:
            raise PreconditionError(f"Paₘ 的覆盖只对 m ≥ 2 构造, 实际 m={m}")
        base = tuple(range(1, m + 2))
        return self.make_reduced(base, self._allowed(base, 1, 2))

    def enumerate_reduced(self, m: int, sizes: Optional[Sequence[int]] = None,
                          distinct: bool = True) -> Iterator[Tuple[Tuple[Subset, ...], ReducedPoset]]:
        """
        基集 1..m+1 上子集大小取自 sizes 的全部子集族

        Args:
            m: 基集大小减一
            sizes: 允许的子集大小, 默认 2..m
            distinct: 是否只保留两两不同构的结果

        Returns:
            (子集族, 约化偏序集) 流
        """
        if m > settings.VERIFY_M_MAX:
            raise BudgetExceededError("enumerate_reduced 的 m", settings.VERIFY_M_MAX, m)
        base = tuple(range(1, m + 2))
        if sizes is None:
            sizes = range(2, m + 1)
        candidates = [s for k in sizes for s in combinations(base, k)]
        logger.debug(f"枚举约化偏序集: m={m}, 候选子集 {len(candidates)} 个, 子集族 {2 ** len(candidates)} 个")
        seen = set()
        for choice in range(1 << len(candidates)):
            family = tuple(candidates[i] for i in iter_bits(choice))
            reduced = self.make_reduced(base, family)
            if distinct:
                code, _ = poset_service.canonical_form(reduced.realized)
                if code in seen:
                    continue
                seen.add(code)
            yield family, reduced

    def is_cover_among_reduced(self, p: ReducedPoset, m: int, cross_check: bool = False) -> bool:
        """
        Q(ε(p)) 是否为 Paₘ 的覆盖

        刻画: F 恰等于某个 {{a,b}, M−{a}, M−{b}}. cross_check 时再在基集 m+1 的
        全部约化偏序集中穷举搜索严格介于两者之间的拟簇 (仅 m ≤ 3).

        Args:
            p: 约化偏序集, 基集大小为 m+1 且 family_admits_pa_m 成立
            m: 整数, 至少为 2
            cross_check: 是否做穷举交叉检查

        Returns:
            是否为覆盖
        """
        admission = self.family_admits_pa_m(p.base, p.family, m)
        if not admission.admits:
            raise PreconditionError("F 不满足 family_admits_pa_m, Paₘ 不包含于 Q(ε(P))")
        members = set(p.family)
        result = any(members == self._allowed(p.base, a, b) for a, b in combinations(p.base, 2))
        if not cross_check:
            return result
        if m > 3:
            raise BudgetExceededError("is_cover_among_reduced 交叉检查的 m", 3, m)

        exhaustive = True
        for family, other in self.enumerate_reduced(m):
            if not self.family_admits_pa_m(other.base, family, m).admits:
                continue
            if self.quasivariety_leq(other.realized, p.realized) and not self.quasivariety_leq(p.realized, other.realized):
                logger.debug(f"严格介于之间: F={[subset_label(s) for s in family]}")
                exhaustive = False
                break
        if exhaustive != result:
            logger.error(f"覆盖刻画与穷举结果不一致: 刻画={result}, 穷举={exhaustive}")
            raise PaqError(f"覆盖刻画与穷举结果不一致: 刻画={result}, 穷举={exhaustive}")
        return result


# 创建全局服务实例
quasivar_service = QuasivarService()

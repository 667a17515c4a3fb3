from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from loguru import logger

from config.settings import settings
from app.schemas.morphism_models import CopySurjection, CoverageReport, MorphismCheck, PpMorphism
from app.schemas.poset_models import Poset, iter_bits
from app.services.exceptions import BudgetExceededError, IndexRangeError, PreconditionError
from app.services.poset_service import poset_service


class _SearchBudget:
    """回溯节点计数"""

    def __init__(self, limit: int, what: str):
        self.limit = limit
        self.what = what
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.nodes > self.limit:
            raise BudgetExceededError(self.what, self.limit)


class MorphismService:
    """pp-态射服务: 检查, 枚举, 满射存在性与覆盖计算"""

    def identity(self, p: Poset) -> PpMorphism:
        return PpMorphism(source=p, target=p, map=tuple(range(p.n)))

    def _check_arity(self, f: Sequence[int], p: Poset, q: Poset):
        if len(f) != p.n:
            raise IndexRangeError(f"映射长度 {len(f)} 与源偏序集规模 {p.n} 不符")
        for x, y in enumerate(f):
            if not 0 <= y < q.n:
                raise IndexRangeError(f"映射值越界: f({x}) = {y} 不在 0..{q.n - 1}")

    def is_monotone(self, f: Sequence[int], p: Poset, q: Poset) -> Optional[Tuple[int, int]]:
        """返回第一个违反保序的 (x, y), 满足时返回 None"""
        for x in range(p.n):
            for y in iter_bits(p.leq[x]):
                if not q.le(f[x], f[y]):
                    return x, y
        return None

    def preserves_maxima(self, f: Sequence[int], p: Poset, q: Poset) -> Optional[int]:
        """返回第一个满足 M(f(x)) ≠ f[M(x)] 的 x, 满足时返回 None"""
        for x in range(p.n):
            image = 0
            for m in iter_bits(p.max_masks[x]):
                image |= 1 << f[m]
            if image != q.max_masks[f[x]]:
                return x
        return None

    def is_pp_morphism(self, f: Sequence[int], p: Poset, q: Poset) -> MorphismCheck:
        """
        检查 f 是否为 pp-态射: 保序且 M(f(x)) = f[M(x)]

        Args:
            f: 候选映射 (下标数组)
            p: 源偏序集
            q: 目标偏序集

        Returns:
            检查结果, 失败时给出违反的条件和元素
        """
        self._check_arity(f, p, q)
        violation = self.is_monotone(f, p, q)
        if violation is not None:
            x, y = violation
            return MorphismCheck(ok=False, condition="monotone", element=(x, y),
                                 message=f"不保序: {p.label(x)} <= {p.label(y)} 但 f({p.label(x)}) 不小于等于 f({p.label(y)})")
        bad = self.preserves_maxima(f, p, q)
        if bad is not None:
            return MorphismCheck(ok=False, condition="maxima", element=(bad,),
                                 message=f"不保持极大元: f(M({p.label(bad)})) ≠ M(f({p.label(bad)}))")
        return MorphismCheck()

    def _search(self, p: Poset, q: Poset, surjective: bool = False) -> Iterator[Tuple[int, ...]]:
        """
        回溯搜索全部 pp-态射

        先给极大元赋值 (只能落在极大元上), 再按 M(x) 的像确定其余元素的候选:
        f(x) 必须是 q 中极大元集合恰为 f[M(x)] 的元素.
        """
        if p.n == 0:
            if not surjective or q.n == 0:
                yield ()
            return
        if q.n == 0:
            return
        budget = _SearchBudget(settings.search_budget, "pp-态射搜索节点")
        p_max = list(iter_bits(p.maxima_mask))
        q_max = list(iter_bits(q.maxima_mask))
        # 上集小的先赋值, 使单调性检查尽早发生
        rest = sorted((x for x in range(p.n) if not p.is_maximal(x)),
                      key=lambda x: (bin(p.leq[x]).count("1"), x))
        order = p_max + rest
        by_maxset: Dict[int, List[int]] = {}
        for y in range(q.n):
            by_maxset.setdefault(q.max_masks[y], []).append(y)
        f = [-1] * p.n
        hit = [0] * q.n
        unhit = [q.n]

        def consistent(x: int, y: int) -> bool:
            for z in order:
                fz = f[z]
                if fz < 0:
                    break
                if p.le(z, x) and not q.le(fz, y):
                    return False
                if p.le(x, z) and not q.le(y, fz):
                    return False
            return True

        def assign(x: int, y: int):
            f[x] = y
            hit[y] += 1
            if hit[y] == 1:
                unhit[0] -= 1

        def unassign(x: int, y: int):
            f[x] = -1
            hit[y] -= 1
            if hit[y] == 0:
                unhit[0] += 1

        def extend(k: int):
            budget.tick()
            if surjective and unhit[0] > len(order) - k:
                return
            if k == len(order):
                yield tuple(f)
                return
            x = order[k]
            if k < len(p_max):
                candidates = q_max
            else:
                image = 0
                for m in iter_bits(p.max_masks[x]):
                    image |= 1 << f[m]
                candidates = by_maxset.get(image, [])
            for y in candidates:
                if k >= len(p_max) and not consistent(x, y):
                    continue
                assign(x, y)
                yield from extend(k + 1)
                unassign(x, y)

        yield from extend(0)

    def enumerate_pp_morphisms(self, p: Poset, q: Poset, limit: Optional[int] = None) -> List[PpMorphism]:
        """
        枚举 p -> q 的全部 pp-态射, 按映射数组字典序

        Args:
            p: 源偏序集
            q: 目标偏序集
            limit: 截断个数

        Returns:
            pp-态射列表
        """
        maps = sorted(self._search(p, q))
        if limit is not None:
            maps = maps[:limit]
        logger.debug(f"枚举 pp-态射: |p|={p.n}, |q|={q.n}, 共 {len(maps)} 个")
        return [PpMorphism(source=p, target=q, map=f) for f in maps]

    def exists_surjective_pp(self, p: Poset, q: Poset) -> Optional[PpMorphism]:
        """
        判断是否存在满 pp-态射 p ->> q

        Args:
            p: 源偏序集
            q: 目标偏序集

        Returns:
            找到的满 pp-态射, 不存在时为 None
        """
        if q.n > p.n or bin(q.maxima_mask).count("1") > bin(p.maxima_mask).count("1"):
            return None
        for f in self._search(p, q, surjective=True):
            return PpMorphism(source=p, target=q, map=f)
        return None

    def covered_points(self, p: Poset, q: Poset) -> CoverageReport:
        """
        计算 q 中被某个 pp-态射 p -> q 的像覆盖的点

        见证按贪心选取: 每次取覆盖最多未覆盖点的态射, 平局取字典序最小的映射.

        Args:
            p: 源偏序集
            q: 目标偏序集

        Returns:
            覆盖报告
        """
        best_map: Dict[int, Tuple[int, ...]] = {}
        for f in self._search(p, q):
            mask = 0
            for y in f:
                mask |= 1 << y
            if mask not in best_map or f < best_map[mask]:
                best_map[mask] = f
        covered = 0
        for mask in best_map:
            covered |= mask

        morphisms: List[PpMorphism] = []
        witness_of: Dict[int, int] = {}
        remaining = covered
        while remaining:
            mask, f = min(best_map.items(),
                          key=lambda item: (-bin(item[0] & remaining).count("1"), item[1]))
            for y in iter_bits(mask & remaining):
                witness_of[y] = len(morphisms)
            morphisms.append(PpMorphism(source=p, target=q, map=f))
            remaining &= ~mask
        report = CoverageReport(target=q, covered=frozenset(iter_bits(covered)),
                                morphisms=tuple(morphisms), witness_of=witness_of)
        logger.debug(f"覆盖计算: |p|={p.n}, |q|={q.n}, 覆盖 {len(report.covered)} 个点, 见证 {len(morphisms)} 个")
        return report

    def exists_surjection_from_copies(self, p: Poset, q: Poset) -> Optional[CopySurjection]:
        """
        判断是否存在若干份 p 的不交并到 q 的满 pp-态射

        不交并上的 pp-态射恰是各分量上 pp-态射的组合, 因此等价于 q 的每个点
        都被某个 p -> q 的 pp-态射覆盖; 份数不超过 |q|.

        Args:
            p: 源偏序集
            q: 目标偏序集

        Returns:
            份数和各分量上的态射, 不存在时为 None
        """
        report = self.covered_points(p, q)
        if not report.complete:
            return None
        return CopySurjection(copies=len(report.morphisms), morphisms=report.morphisms)

    def compose(self, f: PpMorphism, g: PpMorphism) -> PpMorphism:
        """复合 g∘f, 要求 f 的目标等于 g 的源"""
        if f.target != g.source:
            raise PreconditionError("无法复合: f 的目标与 g 的源不同")
        return PpMorphism(source=f.source, target=g.target, map=tuple(g.map[y] for y in f.map))

    # ---- pp-态射像 ----

    @staticmethod
    def _set_partitions(n: int) -> Iterator[Tuple[List[int], int]]:
        """按受限增长串枚举集合划分, 返回 (块编号数组, 块数)"""
        blocks = [0] * n

        def grow(i: int, count: int):
            if i == n:
                yield blocks, count
                return
            for b in range(count + 1):
                blocks[i] = b
                yield from grow(i + 1, max(count, b + 1))

        yield from grow(0, 0)

    @staticmethod
    def _closure(rows: List[int]) -> List[int]:
        k = len(rows)
        rows = list(rows)
        for mid in range(k):
            bit = 1 << mid
            for i in range(k):
                if rows[i] & bit:
                    rows[i] |= rows[mid]
        return rows

    def _quotient_images(self, p: Poset, block_of: Sequence[int], k: int) -> List[Poset]:
        """给定核划分, 返回所有使商映射成为满 pp-态射的块上的序"""
        max_blocks = 0
        for m in iter_bits(p.maxima_mask):
            max_blocks |= 1 << block_of[m]
        block_maxset: List[Optional[int]] = [None] * k
        for x in range(p.n):
            image = 0
            for m in iter_bits(p.max_masks[x]):
                image |= 1 << block_of[m]
            b = block_of[x]
            if block_maxset[b] is None:
                block_maxset[b] = image
            elif block_maxset[b] != image:
                return []
        for b in iter_bits(max_blocks):
            if block_maxset[b] != 1 << b:
                return []

        rows = [1 << b for b in range(k)]
        for x in range(p.n):
            for y in iter_bits(p.leq[x]):
                rows[block_of[x]] |= 1 << block_of[y]
        rows = self._closure(rows)
        if not self._admissible(rows, block_maxset, max_blocks):
            return []

        nonmax = [b for b in range(k) if not max_blocks >> b & 1]
        candidates = [
            (a, b) for a in nonmax for b in nonmax
            if a != b and not rows[a] >> b & 1 and not rows[b] >> a & 1
            and block_maxset[b] & ~block_maxset[a] == 0
        ]
        if len(candidates) > 20:
            raise BudgetExceededError("pp 像的额外序关系候选", 20, len(candidates))
        results: Dict[Tuple[int, ...], Poset] = {}
        for subset in range(1 << len(candidates)):
            extended = list(rows)
            for index in iter_bits(subset):
                a, b = candidates[index]
                extended[a] |= 1 << b
            extended = self._closure(extended)
            key = tuple(extended)
            if key in results or not self._admissible(extended, block_maxset, max_blocks):
                continue
            results[key] = Poset(n=k, leq=key)
        return list(results.values())

    @staticmethod
    def _admissible(rows: List[int], block_maxset: List[Optional[int]], max_blocks: int) -> bool:
        for a in range(len(rows)):
            for b in iter_bits(rows[a] & ~(1 << a)):
                if rows[b] >> a & 1:
                    return False
                if max_blocks >> a & 1:
                    return False
                if block_maxset[b] & ~block_maxset[a]:
                    return False
        return True

    def pp_morphic_images(self, p: Poset, reduced_only: bool = True) -> List[Poset]:
        """
        p 的满 pp-态射像 (同构意义下)

        满 pp-态射由其核划分以及块上的序决定; 块上的序必须包含诱导序,
        且与极大元集合的包含关系一致. 默认只保留约化的像, 即不同元素的
        极大元集合两两不同; 非约化的像与其约化生成同一个拟簇.

        Args:
            p: 偏序集
            reduced_only: 为 False 时返回全部满 pp-态射像

        Returns:
            两两不同构的像, 按规模和典范码排序
        """
        if p.n > settings.IMAGES_MAX_POSET:
            raise BudgetExceededError("pp_morphic_images 规模", settings.IMAGES_MAX_POSET, p.n)
        logger.info(f"计算 pp-态射像: |p|={p.n}, 仅约化={reduced_only}")
        if p.n == 0:
            return [p]
        found: Dict[tuple, Poset] = {}
        for blocks, k in self._set_partitions(p.n):
            for image in self._quotient_images(p, blocks, k):
                if reduced_only and len(set(image.max_masks)) != image.n:
                    continue
                check = self.is_pp_morphism(blocks, p, image)
                if not check.ok:
                    logger.warning(f"商映射不是 pp-态射, 已跳过: {check.message}")
                    continue
                code, perm = poset_service.canonical_form(image)
                if code not in found:
                    inverse = [0] * image.n
                    for position, x in enumerate(perm):
                        inverse[x] = position
                    found[code] = poset_service.relabel(image, inverse)
        return [found[code] for code in sorted(found)]


# 创建全局服务实例
morphism_service = MorphismService()

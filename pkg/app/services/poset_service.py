from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from loguru import logger

from config.settings import settings
from app.schemas.poset_models import MaxSet, OrderReport, Poset, UnionResult, iter_bits
from app.services.exceptions import BudgetExceededError, IndexRangeError, PreconditionError


class PosetService:
    """有限偏序集服务: 构造, 极大元, 不交并, 同构与枚举"""

    def __init__(self):
        self.enum_max = settings.POSET_ENUM_MAX

    def validate(self, p: Poset) -> OrderReport:
        """
        校验偏序公理

        Args:
            p: 偏序集

        Returns:
            校验报告, 失败时给出第一个违反的公理及见证 (字典序)
        """
        if len(p.leq) != p.n or any(row >> p.n for row in p.leq):
            return OrderReport(ok=False, axiom="shape", message=f"关系表与元素个数 {p.n} 不符")

        for x in range(p.n):
            if not p.le(x, x):
                return OrderReport(ok=False, axiom="reflexivity", witness=(x,),
                                   message=f"自反性不成立: {x}")

        for x in range(p.n):
            for y in iter_bits(p.leq[x]):
                if y > x and p.le(y, x):
                    return OrderReport(ok=False, axiom="antisymmetry", witness=(x, y),
                                       message=f"反对称性不成立: {x}, {y}")

        for x in range(p.n):
            for y in iter_bits(p.leq[x]):
                missing = p.leq[y] & ~p.leq[x]
                if missing:
                    z = next(iter_bits(missing))
                    return OrderReport(ok=False, axiom="transitivity", witness=(x, y, z),
                                       message=f"传递性不成立: {x} <= {y} <= {z}")
        return OrderReport()

    def _check_index(self, p: Poset, x: int):
        if not 0 <= x < p.n:
            raise IndexRangeError(f"元素下标越界: {x} 不在 0..{p.n - 1}")

    def maximal_above(self, p: Poset, x: int) -> MaxSet:
        """
        计算 M(x), 即 x 上方的极大元

        Args:
            p: 偏序集
            x: 元素下标

        Returns:
            极大元集合
        """
        self._check_index(p, x)
        return MaxSet(owner=x, maxima=frozenset(iter_bits(p.max_masks[x])))

    def maximal_elements(self, p: Poset) -> FrozenSet[int]:
        return frozenset(iter_bits(p.maxima_mask))

    def make_bm_poset(self, m: int) -> Poset:
        """
        构造 δ(B̄_m): 一个底元加 m 个两两不可比的极大元

        Args:
            m: 极大元个数, m = 0 时为单点

        Returns:
            偏序集, 下标 0 为底元
        """
        if m < 0:
            raise PreconditionError(f"m 必须非负: {m}")
        if m == 0:
            return Poset.from_pairs(1, [], labels=["⊥"])
        labels = ["⊥"] + [str(i) for i in range(1, m + 1)]
        return Poset.from_pairs(m + 1, [(0, i) for i in range(1, m + 1)], labels=labels)

    def disjoint_union(self, ps: Sequence[Poset]) -> UnionResult:
        """
        不交并, 只在分量内部有序关系

        Args:
            ps: 偏序集列表

        Returns:
            并及元素到分量的映射
        """
        rows: List[int] = []
        component: List[int] = []
        offsets: List[int] = []
        labels: List[str] = []
        has_labels = any(p.labels is not None for p in ps)
        offset = 0
        for index, p in enumerate(ps):
            offsets.append(offset)
            for x in range(p.n):
                rows.append(p.leq[x] << offset)
                component.append(index)
                labels.append(f"{p.label(x)}@{index}")
            offset += p.n
        poset = Poset(n=offset, leq=tuple(rows), labels=tuple(labels) if has_labels else None)
        return UnionResult(poset=poset, component=tuple(component), offsets=tuple(offsets))

    def covers(self, p: Poset) -> List[Tuple[int, int]]:
        """Hasse 图的覆盖关系 (i, j): j 覆盖 i"""
        result = []
        for i in range(p.n):
            strict = p.leq[i] & ~(1 << i)
            above_strict = 0
            for j in iter_bits(strict):
                above_strict |= p.leq[j] & ~(1 << j)
            for j in iter_bits(strict & ~above_strict):
                result.append((i, j))
        return result

    def relabel(self, p: Poset, perm: Sequence[int]) -> Poset:
        """按 perm (旧下标 -> 新下标) 重新编号"""
        rows = [0] * p.n
        labels: List[str] = [""] * p.n
        for x in range(p.n):
            row = 0
            for y in iter_bits(p.leq[x]):
                row |= 1 << perm[y]
            rows[perm[x]] = row
            labels[perm[x]] = p.label(x)
        return Poset(n=p.n, leq=tuple(rows), labels=tuple(labels) if p.labels is not None else None)

    def _refine_colors(self, p: Poset) -> List[int]:
        """按上下集大小做初始着色, 再迭代细化直到稳定"""
        strict_up = [p.leq[x] & ~(1 << x) for x in range(p.n)]
        strict_down = [p.down[x] & ~(1 << x) for x in range(p.n)]
        signatures = [(bin(p.down[x]).count("1"), bin(p.leq[x]).count("1")) for x in range(p.n)]
        colors = self._rank(signatures)
        while True:
            signatures = [
                (colors[x],
                 tuple(sorted(colors[y] for y in iter_bits(strict_up[x]))),
                 tuple(sorted(colors[y] for y in iter_bits(strict_down[x]))))
                for x in range(p.n)
            ]
            refined = self._rank(signatures)
            if len(set(refined)) == len(set(colors)):
                return refined
            colors = refined

    @staticmethod
    def _rank(signatures) -> List[int]:
        order = {sig: rank for rank, sig in enumerate(sorted(set(signatures)))}
        return [order[sig] for sig in signatures]

    def canonical_form(self, p: Poset) -> Tuple[tuple, Tuple[int, ...]]:
        """
        典范码

        先做颜色细化, 再在同色元素之间回溯, 取字典序最小的码.
        码的第 k 项记录第 k 个位置的元素与前面各位置元素的比较关系.

        Args:
            p: 偏序集

        Returns:
            (典范码, 排列), 排列的第 k 项是放在位置 k 的元素
        """
        n = p.n
        if n == 0:
            return (0, ()), ()
        colors = self._refine_colors(p)
        slot_colors = sorted(colors)
        # 孪生元素 (严格上集与严格下集都相同) 互换是自同构, 同一层只试一个
        twin_key = [(p.leq[x] & ~(1 << x), p.down[x] & ~(1 << x)) for x in range(n)]

        best: Dict[str, tuple] = {}
        placed: List[int] = []
        used = [False] * n
        rows: List[tuple] = []

        def extend(k: int):
            if k == n:
                code = tuple(rows)
                if "code" not in best or code < best["code"]:
                    best["code"] = code
                    best["perm"] = tuple(placed)
                return
            tried = set()
            for x in range(n):
                if used[x] or colors[x] != slot_colors[k] or twin_key[x] in tried:
                    continue
                tried.add(twin_key[x])
                row = tuple((p.le(y, x) << 1) | p.le(x, y) for y in placed)
                if "code" in best and tuple(rows) + (row,) > best["code"][:k + 1]:
                    continue
                used[x] = True
                placed.append(x)
                rows.append(row)
                extend(k + 1)
                rows.pop()
                placed.pop()
                used[x] = False

        extend(0)
        return (n, best["code"]), best["perm"]

    def is_isomorphic(self, p: Poset, q: Poset) -> Optional[Tuple[int, ...]]:
        """
        判断两个偏序集是否同构

        Args:
            p: 偏序集
            q: 偏序集

        Returns:
            同构映射 (p 的下标 -> q 的下标), 不同构时为 None
        """
        if p.n != q.n or sorted(bin(r).count("1") for r in p.leq) != sorted(bin(r).count("1") for r in q.leq):
            return None
        code_p, perm_p = self.canonical_form(p)
        code_q, perm_q = self.canonical_form(q)
        if code_p != code_q:
            return None
        bijection = [0] * p.n
        for position in range(p.n):
            bijection[perm_p[position]] = perm_q[position]
        return tuple(bijection)

    def upset_masks(self, p: Poset, limit: Optional[int] = None) -> List[int]:
        """
        全部上集的位掩码, 升序

        Args:
            p: 偏序集
            limit: 个数上限, 超出时报错

        Returns:
            上集掩码列表
        """
        # 上集小的元素先处理, 保证处理 x 时它上方的元素都已处理
        order = sorted(range(p.n), key=lambda x: (bin(p.leq[x]).count("1"), x))
        masks = [0]
        for x in order:
            bit = 1 << x
            above = p.leq[x] & ~bit
            masks += [mask | bit for mask in masks if above & ~mask == 0]
            if limit is not None and len(masks) > limit:
                raise BudgetExceededError("上集个数", limit, len(masks))
        return sorted(masks)

    def downset_masks(self, p: Poset) -> List[int]:
        full = p.full_mask
        return sorted(full & ~mask for mask in self.upset_masks(p))

    def enumerate_posets(self, n_max: int) -> Iterator[Poset]:
        """
        枚举规模 0..n_max 的全部偏序集, 同构意义下各出现一次

        每个 k+1 元偏序集都可由某个 k 元偏序集在一个下集上方添加新极大元得到,
        用典范码去重.

        Args:
            n_max: 规模上限

        Returns:
            偏序集流, 按规模递增
        """
        if n_max > self.enum_max:
            raise BudgetExceededError("enumerate_posets 规模", self.enum_max, n_max)
        if n_max < 0:
            return
        logger.debug(f"枚举偏序集: n_max={n_max}")
        level: Dict[tuple, Poset] = {self.canonical_form(Poset(n=0))[0]: Poset(n=0)}
        yield Poset(n=0)
        for size in range(1, n_max + 1):
            next_level: Dict[tuple, Poset] = {}
            for base in level.values():
                for downset in self.downset_masks(base):
                    candidate = self._add_maximal(base, downset)
                    code, perm = self.canonical_form(candidate)
                    if code not in next_level:
                        inverse = [0] * candidate.n
                        for position, x in enumerate(perm):
                            inverse[x] = position
                        next_level[code] = self.relabel(candidate, inverse)
            for code in sorted(next_level):
                yield next_level[code]
            logger.debug(f"规模 {size}: {len(next_level)} 个偏序集")
            level = next_level

    @staticmethod
    def _add_maximal(p: Poset, downset: int) -> Poset:
        new = p.n
        rows = [row | (1 << new) if downset >> x & 1 else row for x, row in enumerate(p.leq)]
        rows.append(1 << new)
        return Poset(n=p.n + 1, leq=tuple(rows))


# 创建全局服务实例
poset_service = PosetService()

from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from config.settings import settings
from app.schemas.algebra_models import AxiomReport, IdentityResult, PAlgebra, Upset
from app.schemas.poset_models import Poset, iter_bits
from app.services.exceptions import BudgetExceededError, IndexRangeError, InvalidAlgebraError, PreconditionError
from app.services.poset_service import poset_service


def _first(mask: np.ndarray) -> Optional[Tuple[int, ...]]:
    """布尔数组中字典序第一个为 True 的下标"""
    hits = np.argwhere(mask)
    if hits.size == 0:
        return None
    return tuple(int(v) for v in hits[0])


class DualityService:
    """有限 Priestley 对偶: 偏序集与 p-代数之间的 ε 和 δ"""

    def upsets(self, p: Poset) -> List[Upset]:
        """全部上集, 按掩码升序"""
        return [Upset(mask=mask) for mask in poset_service.upset_masks(p, limit=settings.ALGEBRA_MAX_SIZE)]

    def _subset_name(self, p: Poset, mask: int) -> str:
        if mask == 0:
            return "∅"
        return "{" + ",".join(p.label(x) for x in iter_bits(mask)) + "}"

    def epsilon(self, p: Poset) -> PAlgebra:
        """
        对偶代数 ε(P): 全体上集, 交为 meet, 并为 join, 伪补为下闭包的补

        Args:
            p: 偏序集

        Returns:
            p-代数, 元素 i 对应第 i 小的上集掩码
        """
        if p.n > settings.EPSILON_MAX_POSET:
            raise BudgetExceededError("epsilon 偏序集规模", settings.EPSILON_MAX_POSET, p.n)
        masks = poset_service.upset_masks(p, limit=settings.ALGEBRA_MAX_SIZE)
        logger.debug(f"构造 ε(P): |P|={p.n}, 上集 {len(masks)} 个")
        values = np.asarray(masks, dtype=np.int64)
        meet = np.searchsorted(values, values[:, None] & values[None, :])
        join = np.searchsorted(values, values[:, None] | values[None, :])
        star = []
        full = p.full_mask
        for mask in masks:
            down = 0
            for x in iter_bits(mask):
                down |= p.down[x]
            star.append(int(np.searchsorted(values, full & ~down)))
        return PAlgebra(
            size=len(masks),
            meet=tuple(tuple(int(v) for v in row) for row in meet),
            join=tuple(tuple(int(v) for v in row) for row in join),
            star=tuple(star),
            zero=0,
            one=len(masks) - 1,
            element_names=tuple(self._subset_name(p, mask) for mask in masks),
            upsets=tuple(masks),
        )

    def is_p_algebra(self, a: PAlgebra) -> AxiomReport:
        """
        穷举检查有界分配格公理与伪补律

        Args:
            a: 运算表

        Returns:
            检查报告, 失败时给出第一个违反的公理和字典序最小的见证
        """
        n = a.size
        shapes_ok = (
            len(a.meet) == n and all(len(row) == n for row in a.meet)
            and len(a.join) == n and all(len(row) == n for row in a.join)
            and len(a.star) == n
        )
        if not shapes_ok:
            return AxiomReport(ok=False, axiom="shape", message=f"运算表形状与元素个数 {n} 不符")
        values = [v for row in a.meet for v in row] + [v for row in a.join for v in row] + list(a.star)
        if any(not 0 <= v < n for v in values) or not (0 <= a.zero < n and 0 <= a.one < n):
            return AxiomReport(ok=False, axiom="shape", message=f"运算表中的值不在 0..{n - 1}")

        meet, join, star = a.meet_array, a.join_array, a.star_array
        elems = np.arange(n)

        for axiom, table in (("meet-commutativity", meet), ("join-commutativity", join)):
            witness = _first(table != table.T)
            if witness is not None:
                return AxiomReport(ok=False, axiom=axiom, witness=witness, message=f"交换律不成立: {witness}")

        for axiom, table in (("meet-associativity", meet), ("join-associativity", join)):
            for x in range(n):
                # (x∘y)∘z 与 x∘(y∘z)
                witness = _first(table[table[x]] != table[x][table])
                if witness is not None:
                    witness = (x,) + witness
                    return AxiomReport(ok=False, axiom=axiom, witness=witness, message=f"结合律不成立: {witness}")

        witness = _first(meet[elems[:, None], join] != elems[:, None])
        if witness is None:
            witness = _first(join[elems[:, None], meet] != elems[:, None])
        if witness is not None:
            return AxiomReport(ok=False, axiom="absorption", witness=witness, message=f"吸收律不成立: {witness}")

        bad = _first((meet[:, a.zero] != a.zero) | (join[:, a.one] != a.one))
        if bad is not None:
            return AxiomReport(ok=False, axiom="bounds", witness=bad,
                               message=f"零元或单位元不是界: {a.name(bad[0])}")

        for x in range(n):
            # x∧(y∨z) 与 (x∧y)∨(x∧z)
            witness = _first(meet[x][join] != join[meet[x][:, None], meet[x][None, :]])
            if witness is not None:
                witness = (x,) + witness
                return AxiomReport(ok=False, axiom="distributivity", witness=witness,
                                   message=f"分配律不成立: {witness}")

        if a.star[a.zero] != a.one:
            return AxiomReport(ok=False, axiom="pseudocomplement", witness=(a.one, a.zero),
                               message="伪补律不成立: 1∧0=0 但 1 不小于等于 0*")
        disjoint = meet == a.zero
        below_star = meet[elems[:, None], star[None, :]] == elems[:, None]
        witness = _first(disjoint != below_star)
        if witness is not None:
            return AxiomReport(ok=False, axiom="pseudocomplement", witness=witness,
                               message=f"伪补律不成立: x={a.name(witness[0])}, y={a.name(witness[1])}")
        return AxiomReport()

    def _require_valid(self, a: PAlgebra, operation: str):
        report = self.is_p_algebra(a)
        if not report.ok:
            logger.error(f"{operation} 收到非法代数: {report.message}")
            raise InvalidAlgebraError(f"{operation}: {report.message}", report)

    def join_irreducibles(self, a: PAlgebra) -> List[int]:
        """非零且不等于严格下方元素之并的元素, 升序"""
        result = []
        for x in range(a.size):
            if x == a.zero:
                continue
            below = a.zero
            for y in range(a.size):
                if y != x and a.le(y, x):
                    below = a.join[below][y]
            if below != x:
                result.append(x)
        return result

    def delta(self, a: PAlgebra) -> Poset:
        """
        对偶偏序集 δ(A): 并既约元, 按代数序的逆序排列

        Args:
            a: 有限 p-代数

        Returns:
            偏序集, 元素 i 对应第 i 个并既约元
        """
        self._require_valid(a, "delta")
        irreducibles = self.join_irreducibles(a)
        pairs = [(i, j) for i, x in enumerate(irreducibles) for j, y in enumerate(irreducibles) if a.le(y, x)]
        logger.debug(f"构造 δ(A): |A|={a.size}, 并既约元 {len(irreducibles)} 个")
        return Poset.from_pairs(len(irreducibles), pairs, labels=[a.name(x) for x in irreducibles])

    def evaluate_ibm(self, a: PAlgebra, m: int, check: bool = True) -> IdentityResult:
        """
        在全部 (m+1) 元赋值上求值 ⋁ᵢ (xᵢ ∧ ⋀_{j≠i} xⱼ*)* = 1

        Args:
            a: 有限 p-代数
            m: 正整数
            check: 是否先检查 p-代数公理

        Returns:
            求值结果, 不满足时给出字典序最小的反例赋值
        """
        if m < 1:
            raise PreconditionError(f"m 必须为正整数: {m}")
        if check:
            self._require_valid(a, "evaluate_ibm")
        n = a.size
        total_assignments = n ** (m + 1)
        if total_assignments > settings.ibm_budget:
            raise BudgetExceededError("evaluate_ibm 赋值个数", settings.ibm_budget, total_assignments)
        if a.zero == a.one:
            return IdentityResult(m=m, satisfied=True, checked=total_assignments)

        meet, join, star = a.meet_array, a.join_array, a.star_array
        rest = np.indices((n,) * m).reshape(m, -1)
        block = rest.shape[1]
        checked = 0
        for x0 in range(n):
            variables = [np.full(block, x0, dtype=np.int64)] + [rest[k] for k in range(m)]
            starred = [star[v] for v in variables]
            value = np.full(block, a.zero, dtype=np.int64)
            for i in range(m + 1):
                term = variables[i]
                for j in range(m + 1):
                    if j != i:
                        term = meet[term, starred[j]]
                value = join[value, star[term]]
            failing = np.flatnonzero(value != a.one)
            if failing.size:
                index = int(failing[0])
                assignment = (x0,) + tuple(int(rest[k][index]) for k in range(m))
                checked += index + 1
                logger.debug(f"ib_{m} 不成立: 赋值 {assignment}")
                return IdentityResult(m=m, satisfied=False, assignment=assignment, checked=checked)
            checked += block
        return IdentityResult(m=m, satisfied=True, checked=checked)

    def product(self, a: PAlgebra, b: PAlgebra) -> PAlgebra:
        """
        直积 A×B, 元素 (i, j) 编号为 i·|B| + j

        Args:
            a: p-代数
            b: p-代数

        Returns:
            按分量运算的 p-代数
        """
        self._require_valid(a, "product")
        self._require_valid(b, "product")
        nb = b.size
        pairs = [(i, j) for i in range(a.size) for j in range(nb)]

        def index(i: int, j: int) -> int:
            return i * nb + j

        meet = tuple(tuple(index(a.meet[i][k], b.meet[j][l]) for k, l in pairs) for i, j in pairs)
        join = tuple(tuple(index(a.join[i][k], b.join[j][l]) for k, l in pairs) for i, j in pairs)
        star = tuple(index(a.star[i], b.star[j]) for i, j in pairs)
        return PAlgebra(
            size=len(pairs), meet=meet, join=join, star=star,
            zero=index(a.zero, b.zero), one=index(a.one, b.one),
            element_names=tuple(f"({a.name(i)},{b.name(j)})" for i, j in pairs),
        )

    def trivial_algebra(self) -> PAlgebra:
        return PAlgebra(size=1, meet=((0,),), join=((0,),), star=(0,), zero=0, one=0)

    def b_bar(self, m: int) -> PAlgebra:
        """
        B̄ₘ: m 个原子的布尔代数上方再加一个新的顶元

        布尔部分的元素为原子集合的掩码 0..2^m-1, 新顶元编号为 2^m.
        """
        if m < 0:
            raise PreconditionError(f"m 必须非负: {m}")
        boolean = 1 << m
        full = boolean - 1
        top = boolean
        size = boolean + 1

        def meet(x: int, y: int) -> int:
            if x == top:
                return y
            if y == top:
                return x
            return x & y

        def join(x: int, y: int) -> int:
            if top in (x, y):
                return top
            return x | y

        def star(x: int) -> int:
            if x == 0:
                return top
            if x == top:
                return 0
            return full & ~x

        def name(x: int) -> str:
            if x == top:
                return "1"
            if x == 0:
                return "0"
            return "{" + ",".join(str(i + 1) for i in iter_bits(x)) + "}"

        return PAlgebra(
            size=size,
            meet=tuple(tuple(meet(x, y) for y in range(size)) for x in range(size)),
            join=tuple(tuple(join(x, y) for y in range(size)) for x in range(size)),
            star=tuple(star(x) for x in range(size)),
            zero=0,
            one=top,
            element_names=tuple(name(x) for x in range(size)),
        )

    def find_embedding(self, a: PAlgebra, b: PAlgebra) -> Optional[Tuple[int, ...]]:
        """
        搜索单同态 A -> B (保持 meet, join, star, 0, 1)

        赋值之后用运算封闭性传播强制的值, 并要求与已赋值元素的序关系一致.

        Args:
            a: p-代数
            b: p-代数

        Returns:
            嵌入映射 (A 的下标 -> B 的下标), 不存在时为 None
        """
        limit = settings.EMBEDDING_MAX_SIZE
        if a.size > limit or b.size > limit:
            raise BudgetExceededError("嵌入搜索代数规模", limit, max(a.size, b.size))
        if a.size > b.size:
            return None
        if (a.zero == a.one) != (b.zero == b.one):
            return None
        budget = settings.search_budget
        nodes = [0]
        # 下方元素少的先赋值
        order = sorted(range(a.size), key=lambda x: (sum(a.le(y, x) for y in range(a.size)), x))

        def propagate(f: Dict[int, int], used: Dict[int, int], queue: List[Tuple[int, int]]) -> bool:
            while queue:
                x, y = queue.pop()
                if x in f:
                    if f[x] != y:
                        return False
                    continue
                if used.get(y, x) != x:
                    return False
                for z, w in f.items():
                    if a.le(x, z) != b.le(y, w) or a.le(z, x) != b.le(w, y):
                        return False
                f[x] = y
                used[y] = x
                queue.append((a.star[x], b.star[y]))
                for z, w in list(f.items()):
                    queue.append((a.meet[x][z], b.meet[y][w]))
                    queue.append((a.join[x][z], b.join[y][w]))
            return True

        def extend(f: Dict[int, int], used: Dict[int, int]) -> Optional[Dict[int, int]]:
            nodes[0] += 1
            if nodes[0] > budget:
                raise BudgetExceededError("嵌入搜索节点", budget)
            pending = next((x for x in order if x not in f), None)
            if pending is None:
                return f
            for y in range(b.size):
                if y in used:
                    continue
                f2, used2 = dict(f), dict(used)
                if propagate(f2, used2, [(pending, y)]):
                    found = extend(f2, used2)
                    if found is not None:
                        return found
            return None

        f: Dict[int, int] = {}
        used: Dict[int, int] = {}
        if not propagate(f, used, [(a.zero, b.zero), (a.one, b.one)]):
            return None
        found = extend(f, used)
        if found is None:
            return None
        return tuple(found[x] for x in range(a.size))

    def are_isomorphic_algebras(self, a: PAlgebra, b: PAlgebra) -> Optional[Tuple[int, ...]]:
        if a.size != b.size:
            return None
        return self.find_embedding(a, b)

    def upset_index(self, a: PAlgebra, mask: int) -> int:
        """ε 构造的代数中, 上集掩码对应的元素下标"""
        if a.upsets is None or mask not in a.upsets:
            raise IndexRangeError(f"不是该代数的上集: {mask}")
        return a.upsets.index(mask)


# 创建全局服务实例
duality_service = DualityService()

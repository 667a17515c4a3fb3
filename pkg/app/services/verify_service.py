import json
import time
from itertools import permutations, product
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger

from config.settings import settings
from app.schemas.algebra_models import PAlgebra
from app.schemas.poset_models import Poset
from app.schemas.quasivar_models import ReducedPoset
from app.schemas.report_models import CheckReport, Mutation
from app.services.duality_service import duality_service
from app.services.exceptions import BudgetExceededError, PreconditionError
from app.services.morphism_service import morphism_service
from app.services.poset_service import poset_service
from app.services.quasivar_service import quasivar_service, subset_label
from app.services.text_codec import text_codec
from app.services.worker_pool import worker_pool


def _corrupt_star(a: PAlgebra) -> PAlgebra:
    """伪补表被置为常值零"""
    return PAlgebra(size=a.size, meet=a.meet, join=a.join, star=(a.zero,) * a.size,
                    zero=a.zero, one=a.one, element_names=a.element_names, upsets=a.upsets)


def _monotone_surjection_exists(p: Poset, q: Poset) -> bool:
    """只检查保序与满射, 不检查极大元"""
    for f in product(range(q.n), repeat=p.n):
        if len(set(f)) == q.n and morphism_service.is_monotone(f, p, q) is None:
            return True
    return False


# ---- 进程池任务, 必须位于模块顶层 ----

def _mplus1_job(args: Tuple[Poset, int, bool]) -> Optional[Tuple[int, bool, Optional[Tuple[int, ...]]]]:
    p, m_max, corrupt = args
    algebra = duality_service.epsilon(p)
    if corrupt:
        algebra = _corrupt_star(algebra)
    for m in range(1, m_max + 1):
        by_maxima = quasivar_service.in_pa_m(p, m)
        result = duality_service.evaluate_ibm(algebra, m, check=False)
        if by_maxima != result.satisfied:
            return m, by_maxima, result.assignment
    return None


def _roundtrip_job(args: Tuple[Poset, bool]) -> Optional[str]:
    p, algebra_roundtrip = args
    algebra = duality_service.epsilon(p)
    back = duality_service.delta(algebra)
    if poset_service.is_isomorphic(back, p) is None:
        return "δ(ε(P)) 与 P 不同构"
    if algebra_roundtrip:
        again = duality_service.epsilon(back)
        if duality_service.are_isomorphic_algebras(again, algebra) is None:
            return "ε(δ(ε(P))) 与 ε(P) 不同构"
    return None


def _arrow_job(args: Tuple[Poset, Poset, bool]) -> Tuple[bool, bool]:
    p, q, drop_maxima = args
    if drop_maxima:
        surjective = _monotone_surjection_exists(p, q)
    else:
        surjective = morphism_service.exists_surjective_pp(p, q) is not None
    embeds = duality_service.find_embedding(duality_service.epsilon(q), duality_service.epsilon(p)) is not None
    return surjective, embeds


def _leq_job(args: Tuple[Poset, Poset]) -> bool:
    p, q = args
    return quasivar_service.quasivariety_leq(p, q)


class VerifyService:
    """可执行的验证: 每项检查给出带证书或反例的报告"""

    def m2_posets(self) -> Dict[str, ReducedPoset]:
        """基集 {1,2,3} 上的 P, Q, R, 满足 Pa₂ ⊊ Q(ε(R)) ⊊ Q(ε(Q)) ⊊ Q(ε(P))"""
        base = (1, 2, 3)
        return {
            "P": quasivar_service.make_reduced(base, [(1, 2)]),
            "Q": quasivar_service.make_reduced(base, [(1, 2), (2, 3)]),
            "R": quasivar_service.make_reduced(base, [(1, 2), (2, 3), (1, 3)]),
        }

    @staticmethod
    def _require_mutation(mutation: Mutation, supported: Sequence[Mutation]):
        if mutation != Mutation.NONE and mutation not in supported:
            raise PreconditionError(f"该检查不支持故障注入 {mutation.value}")

    # ---- 各项检查 ----

    def check_lemma_mplus1(self, n_max: int = 6, m_max: int = 2,
                           mutation: Mutation = Mutation.NONE, jobs: Optional[int] = None) -> CheckReport:
        """
        在所有规模不超过 n_max 的偏序集上比较两种 Paₘ 判定:
        极大元集合大小 与 在 ε(P) 上穷举求值 ibₘ

        Args:
            n_max: 偏序集规模上限
            m_max: m 的上限
            mutation: 仅支持 corrupt-star
            jobs: 进程数

        Returns:
            检查报告
        """
        self._require_mutation(mutation, [Mutation.CORRUPT_STAR])
        if n_max > settings.VERIFY_N_MAX:
            raise BudgetExceededError("lemma-mplus1 偏序集规模", settings.VERIFY_N_MAX, n_max)
        if m_max > settings.VERIFY_M_MAX:
            raise BudgetExceededError("lemma-mplus1 的 m", settings.VERIFY_M_MAX, m_max)
        start = time.perf_counter()
        report = CheckReport(name="lemma-mplus1", params={"n_max": n_max, "m_max": m_max, "mutation": mutation.value})
        logger.info(f"验证极大元判据与 ib_m 一致: n_max={n_max}, m_max={m_max}")

        posets = list(poset_service.enumerate_posets(n_max))
        corrupt = mutation == Mutation.CORRUPT_STAR
        outcomes = worker_pool.map(_mplus1_job, [(p, m_max, corrupt) for p in posets], jobs)
        for p, outcome in zip(posets, outcomes):
            if outcome is None:
                continue
            m, by_maxima, assignment = outcome
            report.fail(
                f"m={m}: 极大元判据={by_maxima}, ib_m 求值={not by_maxima}, 反例赋值={assignment}\n"
                + text_codec.dump_poset(p)
            )
            break
        report.notes.append(f"检查了 {len(posets)} 个偏序集, m = 1..{m_max}")
        report.wall_time = time.perf_counter() - start
        return report

    def check_m2_chain(self) -> CheckReport:
        """
        验证 Pa₂ ⊊ Q(ε(R)) ⊊ Q(ε(Q)) ⊊ Q(ε(P)), 每一步给出双向的成员证书

        Returns:
            检查报告
        """
        start = time.perf_counter()
        report = CheckReport(name="m2-chain", params={"m": 2})
        logger.info("验证 m=2 的拟簇链")
        posets = self.m2_posets()
        bm = poset_service.make_bm_poset(2)

        for name, reduced in posets.items():
            x = reduced.realized
            witness = quasivar_service.contains_pa_m(x, 2)
            if witness is None:
                report.fail(f"{name}: 不存在到 δ(B̄₂) 的满 pp-态射")
            elif quasivar_service.in_pa_m(x, 2):
                report.fail(f"{name}: ε({name}) 属于 Pa₂")

        # 每一步: 较小者是较大者的成员, 反之不成立且阻碍点是底元
        chain = [("B₂", bm, None), ("R", posets["R"].realized, posets["R"]),
                 ("Q", posets["Q"].realized, posets["Q"]), ("P", posets["P"].realized, posets["P"])]
        for (low_name, low, _), (high_name, high, high_reduced) in zip(chain, chain[1:]):
            down = quasivar_service.member(low, [high])
            if not down.is_member:
                report.fail(f"{low_name} 不在 Q(ε({high_name})) 中, 阻碍点 {low.label(down.blocker)}")
                continue
            report.certificates.append(
                f"# {high_name} 的 {len(down.witnesses)} 份拷贝 ->> {low_name}\n"
                + text_codec.dump_certificates(down.witnesses)
            )
            up = quasivar_service.member(high, [low])
            if up.is_member:
                report.fail(f"{high_name} 属于 Q(ε({low_name})), 包含不是严格的")
            elif up.blocker != high_reduced.bottom:
                report.fail(f"{high_name} 的阻碍点是 {high.label(up.blocker)}, 不是底元")
            else:
                report.notes.append(f"Q(ε({low_name})) ⊊ Q(ε({high_name})), 阻碍点 {high.label(up.blocker)}")

        p, q, r = (posets[k].realized for k in ("P", "Q", "R"))
        for source, target, label in ((p, q, "P⊎P->>Q"), (q, r, "Q⊎Q->>R")):
            copies = morphism_service.exists_surjection_from_copies(source, target)
            if copies is None or copies.copies > 2:
                report.fail(f"{label}: 需要的拷贝数超过 2")

        # 复合得到 P⊎P⊎P⊎P ->> R
        h = morphism_service.exists_surjection_from_copies(p, q)
        k = morphism_service.exists_surjection_from_copies(q, r)
        if h is not None and k is not None:
            composed = [morphism_service.compose(f, g) for g in k.morphisms for f in h.morphisms]
            covered = 0
            for f in composed:
                if not morphism_service.is_pp_morphism(f.map, p, r).ok:
                    report.fail(f"复合映射不是 pp-态射: {f.map}")
                covered |= f.image_mask
            if covered != r.full_mask:
                report.fail("复合映射的像没有覆盖 R")
            report.certificates.append(
                f"# P 的 {len(composed)} 份拷贝 ->> R (复合)\n" + text_codec.dump_certificates(composed)
            )
        report.wall_time = time.perf_counter() - start
        return report

    def check_unique_cover(self, m: int = 2, mutation: Mutation = Mutation.NONE,
                           jobs: Optional[int] = None) -> CheckReport:
        """
        在基集 m+1 上的全部约化偏序集中找 Paₘ 的覆盖, 要求恰有一个且与 the_cover(m) 同构

        Args:
            m: 2 或 3
            mutation: 仅支持 skip-family
            jobs: 进程数

        Returns:
            检查报告
        """
        self._require_mutation(mutation, [Mutation.SKIP_FAMILY])
        if m < 2:
            raise PreconditionError(f"覆盖只对 m ≥ 2 讨论, 实际 m={m}")
        if m > settings.VERIFY_M_MAX:
            raise BudgetExceededError("unique-cover 的 m", settings.VERIFY_M_MAX, m)
        start = time.perf_counter()
        report = CheckReport(name="unique-cover", params={"m": m, "mutation": mutation.value})
        logger.info(f"验证 Pa_{m} 在约化偏序集中的覆盖唯一: m={m}")
        expected = quasivar_service.the_cover(m)

        skipped = False
        admitted: List[ReducedPoset] = []
        total = 0
        for family, reduced in quasivar_service.enumerate_reduced(m):
            total += 1
            if mutation == Mutation.SKIP_FAMILY and not skipped \
                    and poset_service.is_isomorphic(reduced.realized, expected.realized) is not None:
                skipped = True
                logger.warning(f"故障注入: 跳过子集族 {[subset_label(s) for s in family]}")
                continue
            admission = quasivar_service.family_admits_pa_m(reduced.base, family, m)
            contains = quasivar_service.contains_pa_m(reduced.realized, m) is not None
            if admission.admits != contains:
                report.fail(f"F={[subset_label(s) for s in family]}: 子集族判据={admission.admits}, 满射存在={contains}")
            if admission.admits and not quasivar_service.in_pa_m(reduced.realized, m):
                admitted.append(reduced)

        pairs = [(i, j) for i in range(len(admitted)) for j in range(len(admitted)) if i != j]
        verdicts = worker_pool.map(_leq_job, [(admitted[i].realized, admitted[j].realized) for i, j in pairs], jobs)
        leq = dict(zip(pairs, verdicts))
        covers = [
            x for i, x in enumerate(admitted)
            if not any(leq[(j, i)] and not leq[(i, j)] for j in range(len(admitted)) if j != i)
        ]
        report.notes.append(f"共 {total} 个两两不同构的约化偏序集, 其中 {len(admitted)} 个严格包含 Pa_{m}")
        for x in admitted:
            theorem = quasivar_service.is_cover_among_reduced(x, m)
            if theorem != (x in covers):
                report.fail(f"F={[subset_label(s) for s in x.family]}: 刻画={theorem}, 穷举={x in covers}")

        if len(covers) != 1:
            report.fail(f"覆盖个数为 {len(covers)}, 不是 1: "
                        + "; ".join(str([subset_label(s) for s in x.family]) for x in covers))
        elif poset_service.is_isomorphic(covers[0].realized, expected.realized) is None:
            report.fail(f"唯一的覆盖 F={[subset_label(s) for s in covers[0].family]} 与 the_cover({m}) 不同构")
        else:
            report.certificates.append(text_codec.dump_reduced(covers[0].base, covers[0].family))
        report.wall_time = time.perf_counter() - start
        return report

    def check_images_of_R(self) -> CheckReport:
        """R 恰有三个约化的 pp-态射像: R 本身, δ(B̄₂), 单点"""
        start = time.perf_counter()
        report = CheckReport(name="images-r", params={"m": 2})
        logger.info("验证 R 的 pp-态射像")
        r = self.m2_posets()["R"].realized
        bm = poset_service.make_bm_poset(2)
        point = poset_service.make_bm_poset(0)
        images = morphism_service.pp_morphic_images(r)
        report.notes.append(f"共 {len(images)} 个像, 规模 {[image.n for image in images]}")
        if len(images) != 3:
            report.fail(f"像的个数为 {len(images)}, 不是 3")
        for expected, name in ((r, "R"), (bm, "δ(B̄₂)"), (point, "单点")):
            if not any(poset_service.is_isomorphic(image, expected) is not None for image in images):
                report.fail(f"像中没有 {name}")

        for image in images:
            if poset_service.is_isomorphic(image, bm) is not None and not quasivar_service.quasivariety_equivalent(image, bm):
                report.fail("δ(B̄₂) 形状的像生成的拟簇不是 Pa₂")
            if image.n == 1 and quasivar_service.contains_pa_m(image, 2) is not None:
                report.fail("单点像的拟簇包含 Pa₂")
        report.wall_time = time.perf_counter() - start
        return report

    def check_duality(self, n_max: int = 5, arrow_n_max: Optional[int] = None,
                      mutation: Mutation = Mutation.NONE, jobs: Optional[int] = None) -> CheckReport:
        """
        对偶性检查: δ(ε(P)) ≅ P, ε(δ(ε(P))) ≅ ε(P), 以及
        满 pp-态射 P ->> Q 存在当且仅当 ε(Q) 嵌入 ε(P)

        Args:
            n_max: 往返检查的偏序集规模上限, 代数往返最多到 5
            arrow_n_max: 箭头对偶的规模上限, 默认 settings.ARROW_N_MAX
            mutation: 仅支持 drop-maxima-check
            jobs: 进程数

        Returns:
            检查报告
        """
        self._require_mutation(mutation, [Mutation.DROP_MAXIMA_CHECK])
        arrow_n_max = settings.ARROW_N_MAX if arrow_n_max is None else arrow_n_max
        if n_max > settings.VERIFY_N_MAX:
            raise BudgetExceededError("duality 往返检查规模", settings.VERIFY_N_MAX, n_max)
        if arrow_n_max > 5:
            raise BudgetExceededError("duality 箭头检查规模", 5, arrow_n_max)
        start = time.perf_counter()
        report = CheckReport(name="duality",
                             params={"n_max": n_max, "arrow_n_max": arrow_n_max, "mutation": mutation.value})
        logger.info(f"验证对偶: n_max={n_max}, arrow_n_max={arrow_n_max}")

        posets = list(poset_service.enumerate_posets(n_max))
        problems = worker_pool.map(_roundtrip_job, [(p, p.n <= 5) for p in posets], jobs)
        for p, problem in zip(posets, problems):
            if problem is not None:
                report.fail(problem + "\n" + text_codec.dump_poset(p))
                break

        small = [p for p in posets if p.n <= arrow_n_max]
        if arrow_n_max > n_max:
            small = list(poset_service.enumerate_posets(arrow_n_max))
        pairs = [(p, q) for p in small for q in small]
        drop = mutation == Mutation.DROP_MAXIMA_CHECK
        outcomes = worker_pool.map(_arrow_job, [(p, q, drop) for p, q in pairs], jobs)
        for (p, q), (surjective, embeds) in zip(pairs, outcomes):
            if surjective != embeds:
                report.fail(f"满射存在={surjective}, 嵌入存在={embeds}\n"
                            + text_codec.dump_poset(p) + text_codec.dump_poset(q))
                break
        report.notes.append(f"往返 {len(posets)} 个偏序集, 箭头 {len(pairs)} 对")
        report.wall_time = time.perf_counter() - start
        return report

    def check_claim_calfg(self, m: int = 2) -> CheckReport:
        """
        对 {p, q₁, q₂} 的全部 64 对子族 (F, G):
        P_F 的若干拷贝满射到 P_G 当且仅当 交换同样大小的成员后 F ⊆ G

        Args:
            m: 2 或 3

        Returns:
            检查报告
        """
        if m < 2:
            raise PreconditionError(f"只对 m ≥ 2 讨论, 实际 m={m}")
        start = time.perf_counter()
        report = CheckReport(name="claim-calfg", params={"m": m})
        logger.info(f"验证子族表: m={m}")
        base = tuple(range(1, m + 2))
        named = [(1, 2), tuple(a for a in base if a != 1), tuple(a for a in base if a != 2)]
        sizes = [len(s) for s in named]
        # 只交换大小相同的成员
        exchanges = [perm for perm in permutations(range(3))
                     if all(sizes[perm[i]] == sizes[i] for i in range(3))]
        if m == 3:
            report.notes.append("m=3: 只允许交换大小相同的成员, 即 q₁ 与 q₂")

        families = [frozenset(i for i in range(3) if mask >> i & 1) for mask in range(8)]
        realized = [quasivar_service.make_reduced(base, [named[i] for i in f]).realized for f in families]
        agreed = 0
        for fi, f in enumerate(families):
            for gi, g in enumerate(families):
                expected = any({perm[i] for i in f} <= g for perm in exchanges)
                actual = morphism_service.exists_surjection_from_copies(realized[fi], realized[gi]) is not None
                if expected != actual:
                    report.fail(f"F={sorted(f)}, G={sorted(g)}: 预期={expected}, 实际={actual}")
                else:
                    agreed += 1
        report.notes.append(f"{agreed}/64 对一致")
        report.wall_time = time.perf_counter() - start
        return report

    def check_all(self, mutation: Mutation = Mutation.NONE, jobs: Optional[int] = None) -> List[CheckReport]:
        """按默认规模运行全部检查, 故障只注入到负责发现它的检查"""

        def pick(supported: Mutation) -> Mutation:
            return mutation if mutation == supported else Mutation.NONE

        reports = [
            self.check_lemma_mplus1(settings.VERIFY_N_MAX, 2, pick(Mutation.CORRUPT_STAR), jobs),
            self.check_m2_chain(),
            self.check_unique_cover(2, pick(Mutation.SKIP_FAMILY), jobs),
            self.check_unique_cover(3, pick(Mutation.SKIP_FAMILY), jobs),
            self.check_images_of_R(),
            self.check_duality(settings.VERIFY_N_MAX, settings.ARROW_N_MAX, pick(Mutation.DROP_MAXIMA_CHECK), jobs),
            self.check_claim_calfg(2),
            self.check_claim_calfg(3),
        ]
        failed = [r.name for r in reports if not r.passed]
        if failed:
            logger.warning(f"未通过的检查: {failed}")
        return reports

    # ---- 报告输出 ----

    def export(self, reports: Sequence[CheckReport], report_path: Optional[Path] = None,
               cert_dir: Optional[Path] = None):
        """
        证书写入 cert_dir, 报告按每项检查一行 JSON 写入 report_path

        Args:
            reports: 检查报告
            report_path: 报告文件
            cert_dir: 证书目录
        """
        if cert_dir is not None:
            cert_dir = Path(cert_dir)
            cert_dir.mkdir(parents=True, exist_ok=True)
            for report in reports:
                report.certificate_paths = []
                for index, certificate in enumerate(report.certificates):
                    path = cert_dir / f"{report.name}-{index}.cert"
                    text_codec.write_text(path, certificate)
                    report.certificate_paths.append(str(path))
        if report_path is not None:
            lines = [
                json.dumps(report.model_dump(mode="json", exclude={"certificates"}), ensure_ascii=False)
                for report in reports
            ]
            text_codec.write_text(Path(report_path), "\n".join(lines) + "\n")
            logger.info(f"报告已写入: {report_path}")


# 创建全局服务实例
verify_service = VerifyService()

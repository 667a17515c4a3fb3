from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pydotplus
from loguru import logger

from app.schemas.algebra_models import PAlgebra
from app.schemas.morphism_models import PpMorphism
from app.schemas.poset_models import Poset
from app.services.exceptions import FormatError
from app.services.poset_service import poset_service


def _lines(text: str) -> Iterable[Tuple[int, List[str]]]:
    """去掉注释和空行, 返回 (行号, 词列表)"""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line_no, line.split()


def _int(token: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"需要整数, 得到 {token!r}", line_no)


class TextCodec:
    """文本格式的读写: 偏序集, 代数表, 态射证书, 约化偏序集字面量, DOT"""

    # ---- 偏序集 ----

    def parse_poset(self, text: str, check: bool = True) -> Poset:
        """
        解析偏序集文本

        Args:
            text: `poset <n>` 开头, 之后为 `le i j` 或 `label i 名称`
            check: 是否在补全闭包后检查反对称性

        Returns:
            偏序集
        """
        n: Optional[int] = None
        pairs: List[Tuple[int, int]] = []
        labels: Dict[int, str] = {}
        for line_no, words in _lines(text):
            head = words[0]
            if n is None:
                if head != "poset" or len(words) != 2:
                    raise FormatError("第一行必须是 `poset <n>`", line_no)
                n = _int(words[1], line_no)
                if n < 0:
                    raise FormatError(f"元素个数不能为负: {n}", line_no)
                continue
            if head == "le" and len(words) == 3:
                i, j = _int(words[1], line_no), _int(words[2], line_no)
                if not (0 <= i < n and 0 <= j < n):
                    raise FormatError(f"下标越界: {i} {j}", line_no)
                pairs.append((i, j))
            elif head == "label" and len(words) >= 3:
                i = _int(words[1], line_no)
                if not 0 <= i < n:
                    raise FormatError(f"下标越界: {i}", line_no)
                labels[i] = " ".join(words[2:])
            else:
                raise FormatError(f"无法识别的行: {' '.join(words)}", line_no)
        if n is None:
            raise FormatError("空输入, 缺少 `poset <n>`")
        label_list = [labels.get(i, str(i)) for i in range(n)] if labels else None
        poset = Poset.from_pairs(n, pairs, labels=label_list)
        if check:
            report = poset_service.validate(poset)
            if not report.ok:
                raise FormatError(f"不是偏序: {report.message}")
        return poset

    def dump_poset(self, p: Poset) -> str:
        """写出偏序集, 只写覆盖关系"""
        lines = [f"poset {p.n}"]
        if p.labels is not None:
            for i in range(p.n):
                label = " ".join(p.labels[i].split())
                if "#" in label:
                    raise FormatError(f"标签中不能含有 '#': {label!r}")
                # 空标签读回时取默认名
                if label:
                    lines.append(f"label {i} {label}")
        lines += [f"le {i} {j}" for i, j in poset_service.covers(p)]
        return "\n".join(lines) + "\n"

    # ---- 态射证书 ----

    def parse_certificates(self, text: str) -> List[Tuple[int, Tuple[int, ...]]]:
        """
        解析证书, 一个文件可以包含多个 `ppmap` 块

        Returns:
            (生成元编号, 映射数组) 列表
        """
        blocks: List[Tuple[int, Tuple[int, ...]]] = []
        current: Optional[Dict] = None

        def close(line_no: Optional[int]):
            if current is None:
                return
            size = current["size"]
            pairs = current["pairs"]
            if sorted(pairs) != list(range(size)):
                raise FormatError(f"ppmap 需要恰好 {size} 个 pair, 源下标 0..{size - 1} 各一次", line_no)
            blocks.append((current["source"], tuple(pairs[i] for i in range(size))))

        for line_no, words in _lines(text):
            head = words[0]
            if head == "ppmap" and len(words) == 2:
                close(line_no)
                current = {"size": _int(words[1], line_no), "source": 0, "pairs": {}}
            elif current is None:
                raise FormatError("证书必须以 `ppmap <k>` 开头", line_no)
            elif head == "source" and len(words) == 2:
                current["source"] = _int(words[1], line_no)
            elif head == "pair" and len(words) == 3:
                src, dst = _int(words[1], line_no), _int(words[2], line_no)
                if src in current["pairs"]:
                    raise FormatError(f"源元素 {src} 重复", line_no)
                current["pairs"][src] = dst
            else:
                raise FormatError(f"无法识别的行: {' '.join(words)}", line_no)
        close(None)
        return blocks

    def dump_certificates(self, morphisms: Sequence[PpMorphism],
                          sources: Optional[Sequence[int]] = None) -> str:
        lines: List[str] = []
        for index, f in enumerate(morphisms):
            lines.append(f"ppmap {len(f.map)}")
            if sources is not None and sources[index]:
                lines.append(f"source {sources[index]}")
            lines += [f"pair {x} {y}" for x, y in enumerate(f.map)]
        return "\n".join(lines) + "\n"

    # ---- 代数表 ----

    def parse_algebra(self, text: str) -> PAlgebra:
        """
        解析代数表

        Args:
            text: `palg <n>` 开头, 之后为 meet/join/star/zero/one 行, 可选 `name i 名称`

        Returns:
            p-代数 (未校验公理)
        """
        n: Optional[int] = None
        meet: Dict[Tuple[int, int], int] = {}
        join: Dict[Tuple[int, int], int] = {}
        star: Dict[int, int] = {}
        names: Dict[int, str] = {}
        zero = one = None
        for line_no, words in _lines(text):
            head = words[0]
            if n is None:
                if head != "palg" or len(words) != 2:
                    raise FormatError("第一行必须是 `palg <n>`", line_no)
                n = _int(words[1], line_no)
                if n < 1:
                    raise FormatError(f"代数至少有一个元素: {n}", line_no)
                continue
            values = [_int(w, line_no) for w in words[1:]] if head != "name" else []
            if any(not 0 <= v < n for v in values):
                raise FormatError(f"下标越界: {' '.join(words)}", line_no)
            if head in ("meet", "join") and len(values) == 3:
                (meet if head == "meet" else join)[(values[0], values[1])] = values[2]
            elif head == "star" and len(values) == 2:
                star[values[0]] = values[1]
            elif head == "zero" and len(values) == 1:
                zero = values[0]
            elif head == "one" and len(values) == 1:
                one = values[0]
            elif head == "name" and len(words) >= 3:
                i = _int(words[1], line_no)
                if not 0 <= i < n:
                    raise FormatError(f"下标越界: {i}", line_no)
                names[i] = " ".join(words[2:])
            else:
                raise FormatError(f"无法识别的行: {' '.join(words)}", line_no)
        if n is None:
            raise FormatError("空输入, 缺少 `palg <n>`")
        for table, label in ((meet, "meet"), (join, "join")):
            if len(table) != n * n:
                raise FormatError(f"{label} 表不完整: {len(table)}/{n * n}")
        if len(star) != n or zero is None or one is None:
            raise FormatError("star 表, zero 或 one 缺失")
        return PAlgebra(
            size=n,
            meet=tuple(tuple(meet[(i, j)] for j in range(n)) for i in range(n)),
            join=tuple(tuple(join[(i, j)] for j in range(n)) for i in range(n)),
            star=tuple(star[i] for i in range(n)),
            zero=zero,
            one=one,
            element_names=tuple(names.get(i, str(i)) for i in range(n)) if names else None,
        )

    def dump_algebra(self, a: PAlgebra) -> str:
        lines = [f"palg {a.size}"]
        if a.element_names is not None:
            lines += [f"name {i} {a.element_names[i]}" for i in range(a.size)]
        lines += [f"meet {i} {j} {a.meet[i][j]}" for i in range(a.size) for j in range(a.size)]
        lines += [f"join {i} {j} {a.join[i][j]}" for i in range(a.size) for j in range(a.size)]
        lines += [f"star {i} {a.star[i]}" for i in range(a.size)]
        lines += [f"zero {a.zero}", f"one {a.one}"]
        return "\n".join(lines) + "\n"

    # ---- 约化偏序集字面量 ----

    def parse_reduced(self, text: str) -> Tuple[Tuple[int, ...], List[Tuple[int, ...]]]:
        """
        解析 `reduced <k>` 字面量, 基集为 1..k

        Returns:
            (基集, 子集族)
        """
        size: Optional[int] = None
        family: List[Tuple[int, ...]] = []
        for line_no, words in _lines(text):
            if size is None:
                if words[0] != "reduced" or len(words) != 2:
                    raise FormatError("第一行必须是 `reduced <k>`", line_no)
                size = _int(words[1], line_no)
                if size < 1:
                    raise FormatError(f"基集不能为空: {size}", line_no)
                continue
            if words[0] != "set" or len(words) != 2:
                raise FormatError(f"无法识别的行: {' '.join(words)}", line_no)
            members = tuple(sorted({_int(w, line_no) for w in words[1].split(",") if w}))
            if not members or any(not 1 <= a <= size for a in members):
                raise FormatError(f"子集必须非空且落在 1..{size}: {words[1]}", line_no)
            family.append(members)
        if size is None:
            raise FormatError("空输入, 缺少 `reduced <k>`")
        return tuple(range(1, size + 1)), family

    def dump_reduced(self, base: Sequence[int], family: Sequence[Sequence[int]]) -> str:
        """写出字面量, 基集按顺序重新编号为 1..k"""
        number = {a: i for i, a in enumerate(sorted(base), start=1)}
        lines = [f"reduced {len(base)}"]
        lines += ["set " + ",".join(str(number[a]) for a in members) for members in family]
        return "\n".join(lines) + "\n"

    # ---- DOT ----

    def to_dot(self, p: Poset, name: str = "P") -> str:
        """Hasse 图, 极大元放在最上层"""
        g = pydotplus.Dot(graph_name=name, graph_type="digraph")
        g.set_rankdir("BT")
        g.set_node_defaults(shape="circle", fontsize="10")
        for i in range(p.n):
            # pydotplus 只转义双引号
            g.add_node(pydotplus.Node(f"n{i}", label=p.label(i).replace("\\", "\\\\")))
        top = pydotplus.Subgraph(rank="max")
        for i in range(p.n):
            if p.is_maximal(i):
                top.add_node(pydotplus.Node(f"n{i}"))
        if top.get_nodes():
            g.add_subgraph(top)
        for i, j in poset_service.covers(p):
            g.add_edge(pydotplus.Edge(f"n{i}", f"n{j}", arrowhead="none"))
        return g.to_string()

    # ---- 文件 ----

    def read_text(self, path: Path) -> str:
        logger.debug(f"读取文件: {path}")
        return Path(path).read_text(encoding="utf-8")

    def write_text(self, path: Path, text: str):
        logger.debug(f"写入文件: {path}")
        Path(path).write_text(text, encoding="utf-8")


# 创建全局编解码实例
text_codec = TextCodec()

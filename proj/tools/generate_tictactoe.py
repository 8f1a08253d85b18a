#!/usr/bin/env python3
# Copyright 2026 The Q-tree Lab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the tic-tac-toe endgame corpus from the rules of the game.

Every legal final board of a game where "x" moves first is emitted once, in
the published attribute format (nine fields top-left to bottom-right with
x/o/b symbols, followed by positive/negative). A board is positive iff "x"
completed a three-in-a-row.
"""
import sys

LINES = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8),
         (0, 4, 8), (2, 4, 6)]


def winner(board):
    for a, b, c in LINES:
        if board[a] != "b" and board[a] == board[b] == board[c]:
            return board[a]
    return None


def endgames():
    seen = {}
    stack = [("b" * 9, "x")]
    while stack:
        board, player = stack.pop()
        w = winner(board)
        if w is not None or "b" not in board:
            seen[board] = "positive" if w == "x" else "negative"
            continue
        nxt = "o" if player == "x" else "x"
        for i in range(9):
            if board[i] == "b":
                stack.append((board[:i] + player + board[i + 1:], nxt))
    return seen


def main():
    out = sys.stdout if len(sys.argv) < 2 else open(sys.argv[1], "w")
    boards = endgames()
    # Mirror the corpus ordering: positive boards first, each block sorted.
    order = {"x": 0, "o": 1, "b": 2}
    key = lambda s: [order[c] for c in s]
    for label in ("positive", "negative"):
        for board in sorted((b for b, l in boards.items() if l == label), key=key):
            out.write(",".join(board) + "," + label + "\n")


if __name__ == "__main__":
    main()

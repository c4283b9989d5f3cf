//! Doubly-linked lists threaded through a shared slot array.
//!
//! Every slot belongs to at most one list at a time. Lists only store their
//! head, tail and length, so a slot can be unlinked in O(1) given nothing but
//! its index, and moved between lists without reallocating.

pub(crate) const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Link<O> {
    pub prev: u32,
    pub next: u32,
    pub owner: Option<O>,
}

impl<O> Default for Link<O> {
    fn default() -> Self {
        Self {
            prev: NIL,
            next: NIL,
            owner: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ListHead {
    head: u32,
    tail: u32,
    len: usize,
}

impl Default for ListHead {
    fn default() -> Self {
        Self {
            head: NIL,
            tail: NIL,
            len: 0,
        }
    }
}

impl ListHead {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn first(&self) -> Option<u32> {
        (self.head != NIL).then_some(self.head)
    }
}

/// Slot storage for links; grows on demand.
#[derive(Debug, Clone)]
pub(crate) struct Links<O> {
    nodes: Vec<Link<O>>,
}

impl<O: Copy + PartialEq> Links<O> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn ensure(&mut self, slot: u32) {
        let need = slot as usize + 1;
        if self.nodes.len() < need {
            self.nodes.resize_with(need, Link::default);
        }
    }

    pub fn owner(&self, slot: u32) -> Option<O> {
        self.nodes.get(slot as usize).and_then(|l| l.owner)
    }

    /// Appends a currently unlinked slot.
    pub fn push_back(&mut self, list: &mut ListHead, slot: u32, owner: O) {
        self.ensure(slot);
        debug_assert!(self.nodes[slot as usize].owner.is_none(), "slot already linked");
        let tail = list.tail;
        self.nodes[slot as usize] = Link {
            prev: tail,
            next: NIL,
            owner: Some(owner),
        };
        if tail == NIL {
            list.head = slot;
        } else {
            self.nodes[tail as usize].next = slot;
        }
        list.tail = slot;
        list.len += 1;
    }

    /// Unlinks `slot` from `list`, which must be the list it is on.
    pub fn unlink(&mut self, list: &mut ListHead, slot: u32) {
        let Link { prev, next, .. } = self.nodes[slot as usize];
        if prev == NIL {
            list.head = next;
        } else {
            self.nodes[prev as usize].next = next;
        }
        if next == NIL {
            list.tail = prev;
        } else {
            self.nodes[next as usize].prev = prev;
        }
        list.len -= 1;
        self.nodes[slot as usize] = Link::default();
    }

    /// Empties `list`, returning its slots in order; all become unlinked.
    pub fn drain(&mut self, list: &mut ListHead) -> Vec<u32> {
        let mut out = Vec::with_capacity(list.len);
        let mut cur = list.head;
        while cur != NIL {
            out.push(cur);
            let next = self.nodes[cur as usize].next;
            self.nodes[cur as usize] = Link::default();
            cur = next;
        }
        *list = ListHead::default();
        out
    }

    pub fn iter<'a>(&'a self, list: &ListHead) -> impl Iterator<Item = u32> + 'a {
        let mut cur = list.head;
        std::iter::from_fn(move || {
            if cur == NIL {
                return None;
            }
            let slot = cur;
            cur = self.nodes[slot as usize].next;
            Some(slot)
        })
    }
}

using System.Collections.Generic;

public static class xMsIntUtil
{
    public static bool xMsInt(int y, int[] x) { return AsSet(x).Contains(y); }

    public static bool xMsInt(int y, int[,] x) { return AsSet(x).Contains(y); }

    public static bool[] xMsInt(int[] y, int x)
    {
        var set = new HashSet<int> { x };
        return Map(y, set);
    }

    public static bool[] xMsInt(int[] y, int[] x) { return Map(y, AsSet(x)); }

    public static bool[] xMsInt(int[] y, int[,] x) { return Map(y, AsSet(x)); }

    public static bool[,] xMsInt(int[,] y, int x)
    {
        var set = new HashSet<int> { x };
        return Map(y, set);
    }

    public static bool[,] xMsInt(int[,] y, int[] x) { return Map(y, AsSet(x)); }

    public static bool[,] xMsInt(int[,] y, int[,] x) { return Map(y, AsSet(x)); }

    private static HashSet<int> AsSet(int[] x) { return new HashSet<int>(x); }

    private static HashSet<int> AsSet(int[,] x)
    {
        var set = new HashSet<int>();
        foreach (int v in x) set.Add(v);
        return set;
    }

    private static bool[] Map(int[] y, HashSet<int> set)
    {
        var r = new bool[y.Length];
        for (int i = 0; i < y.Length; i++) r[i] = set.Contains(y[i]);
        return r;
    }

    private static bool[,] Map(int[,] y, HashSet<int> set)
    {
        var r = new bool[y.GetLength(0), y.GetLength(1)];
        for (int i = 0; i < y.GetLength(0); i++)
            for (int j = 0; j < y.GetLength(1); j++)
                r[i, j] = set.Contains(y[i, j]);
        return r;
    }
}

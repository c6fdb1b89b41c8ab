using System.Collections.Generic;

public static class xIsectrUtil
{
    // Rows of x that also occur among the rows of y.
    public static int[,] xIsectr(int[,] y, int[,] x)
    {
        var yRows = new HashSet<string>();
        for (int i = 0; i < y.GetLength(0); i++) yRows.Add(RowKey(y, i));
        var kept = new List<int>();
        for (int i = 0; i < x.GetLength(0); i++)
            if (yRows.Contains(RowKey(x, i))) kept.Add(i);
        var r = new int[kept.Count, x.GetLength(1)];
        for (int i = 0; i < kept.Count; i++)
            for (int j = 0; j < x.GetLength(1); j++)
                r[i, j] = x[kept[i], j];
        return r;
    }

    private static string RowKey(int[,] m, int row)
    {
        var parts = new string[m.GetLength(1)];
        for (int j = 0; j < m.GetLength(1); j++) parts[j] = m[row, j].ToString();
        return string.Join(",", parts);
    }
}
